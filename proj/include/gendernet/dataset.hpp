#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace gendernet {

// Label coding: utrum = 1, neutrum = 0.
struct LabeledWord {
    std::string surface;
    int label = 0;

    bool operator==(const LabeledWord&) const = default;
};

struct DatasetSplit {
    std::vector<LabeledWord> train;
    std::vector<LabeledWord> validation;
    std::vector<LabeledWord> test;
    std::uint64_t seed = 0;
};

struct SuffixStat {
    std::string suffix;
    std::size_t occurrences = 0;
    double fraction_utrum = 0.0;
};

struct SuffixRule {
    std::string suffix;
    double utrum_probability = 0.0;
};

// Dataset files are UTF-8 text, one "surface<TAB>label" record per line with
// label in {0,1,U,N,u,n}; '#' lines are comments, blank lines are skipped.
// Malformed lines raise std::runtime_error naming the line number. Duplicate
// surfaces are kept (homographs may carry both genders).
std::vector<LabeledWord> load_dataset(const std::filesystem::path& path);
std::vector<LabeledWord> parse_dataset(std::istream& in, const std::string& origin);
void write_dataset(const std::vector<LabeledWord>& data, const std::filesystem::path& path);

// Seeded uniform shuffle (SplitMix64 + Fisher-Yates, see rng.hpp) followed by
// contiguous slicing into floor(0.6 N) / floor(0.2 N) / remainder.
// Requires at least 5 words.
DatasetSplit split_dataset(const std::vector<LabeledWord>& data, std::uint64_t seed);

// Keeps the words whose surface does not end with any of the given suffixes,
// preserving order. Matching is case-sensitive on raw characters; a word
// equal to a suffix counts as a match.
std::vector<LabeledWord> filter_suffix_test_set(const std::vector<LabeledWord>& test,
                                                const std::vector<std::string>& suffixes);

// Occurrence count and utrum fraction of words ending in suffix. Throws when
// the suffix never occurs (the fraction would be undefined).
SuffixStat suffix_statistics(const std::vector<LabeledWord>& data, const std::string& suffix);

// Frequency of the most common class; >= 0.5 by construction.
double majority_baseline(const std::vector<LabeledWord>& data);

// Desk-scale stand-in for the SALDO noun list: n words, each a random stem of
// 2-12 letters over a-z + a-ring/a-umlaut/o-umlaut, a rule suffix chosen
// uniformly, and a label drawn with that rule's utrum probability.
std::vector<LabeledWord> synthesize_dataset(std::uint64_t seed, std::size_t n,
                                            const std::vector<SuffixRule>& rules);

// Suffixes removed from the second test set: ing, tion, het, ist, eri.
const std::vector<std::string>& default_drop_suffixes();

// The suffixes whose corpus statistics the stats command reports by default.
const std::vector<std::string>& default_stat_suffixes();

}  // namespace gendernet
