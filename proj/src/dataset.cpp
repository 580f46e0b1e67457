#include "gendernet/dataset.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "gendernet/rng.hpp"
#include "gendernet/utf8.hpp"

namespace gendernet {

namespace {

int parse_label(const std::string& field, const std::string& origin, std::size_t line_no) {
    if (field.size() == 1) {
        switch (field[0]) {
            case '1':
            case 'U':
            case 'u':
                return 1;
            case '0':
            case 'N':
            case 'n':
                return 0;
            default:
                break;
        }
    }
    throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": bad label '" + field +
                             "' (expected 0, 1, U, N, u or n)");
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::vector<LabeledWord> parse_dataset(std::istream& in, const std::string& origin) {
    std::vector<LabeledWord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                                     ": missing tab separator");
        }
        LabeledWord w;
        w.surface = line.substr(0, tab);
        if (w.surface.empty()) {
            throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty surface");
        }
        w.label = parse_label(line.substr(tab + 1), origin, line_no);
        out.push_back(std::move(w));
    }
    return out;
}

std::vector<LabeledWord> load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path.string());
    return parse_dataset(in, path.filename().string());
}

void write_dataset(const std::vector<LabeledWord>& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write dataset file: " + path.string());
    for (const auto& w : data) {
        out << w.surface << '\t' << w.label << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

DatasetSplit split_dataset(const std::vector<LabeledWord>& data, std::uint64_t seed) {
    const std::size_t n = data.size();
    if (n < 5) throw std::invalid_argument("split_dataset: need at least 5 words");

    std::vector<LabeledWord> shuffled = data;
    SplitMix64 rng(seed);
    seeded_shuffle(shuffled, rng);

    const std::size_t n_train = n * 6 / 10;
    const std::size_t n_val = n * 2 / 10;

    DatasetSplit split;
    split.seed = seed;
    split.train.assign(shuffled.begin(), shuffled.begin() + n_train);
    split.validation.assign(shuffled.begin() + n_train, shuffled.begin() + n_train + n_val);
    split.test.assign(shuffled.begin() + n_train + n_val, shuffled.end());
    return split;
}

std::vector<LabeledWord> filter_suffix_test_set(const std::vector<LabeledWord>& test,
                                                const std::vector<std::string>& suffixes) {
    std::vector<LabeledWord> out;
    out.reserve(test.size());
    for (const auto& w : test) {
        bool drop = false;
        for (const auto& s : suffixes) {
            if (ends_with(w.surface, s)) {
                drop = true;
                break;
            }
        }
        if (!drop) out.push_back(w);
    }
    return out;
}

SuffixStat suffix_statistics(const std::vector<LabeledWord>& data, const std::string& suffix) {
    if (suffix.empty()) throw std::invalid_argument("suffix_statistics: empty suffix");
    SuffixStat stat;
    stat.suffix = suffix;
    std::size_t utrum = 0;
    for (const auto& w : data) {
        if (ends_with(w.surface, suffix)) {
            ++stat.occurrences;
            utrum += static_cast<std::size_t>(w.label);
        }
    }
    if (stat.occurrences == 0) {
        throw std::runtime_error("suffix_statistics: no word ends in '" + suffix +
                                 "', fraction undefined");
    }
    stat.fraction_utrum = static_cast<double>(utrum) / static_cast<double>(stat.occurrences);
    return stat;
}

double majority_baseline(const std::vector<LabeledWord>& data) {
    if (data.empty()) throw std::invalid_argument("majority_baseline: empty dataset");
    std::size_t utrum = 0;
    for (const auto& w : data) utrum += static_cast<std::size_t>(w.label);
    const std::size_t majority = std::max(utrum, data.size() - utrum);
    return static_cast<double>(majority) / static_cast<double>(data.size());
}

std::vector<LabeledWord> synthesize_dataset(std::uint64_t seed, std::size_t n,
                                            const std::vector<SuffixRule>& rules) {
    if (n == 0) throw std::invalid_argument("synthesize_dataset: n must be positive");
    if (rules.empty()) throw std::invalid_argument("synthesize_dataset: empty rule list");
    for (const auto& r : rules) {
        if (r.utrum_probability < 0.0 || r.utrum_probability > 1.0) {
            throw std::invalid_argument("synthesize_dataset: probability out of [0,1] for '" +
                                        r.suffix + "'");
        }
    }

    static constexpr char32_t alphabet[] = {
        U'a', U'b', U'c', U'd', U'e', U'f', U'g', U'h', U'i', U'j', U'k', U'l', U'm', U'n', U'o',
        U'p', U'q', U'r', U's', U't', U'u', U'v', U'w', U'x', U'y', U'z', U'å', U'ä',
        U'ö'};
    static constexpr std::size_t alphabet_size = sizeof(alphabet) / sizeof(alphabet[0]);

    SplitMix64 rng(seed);
    std::vector<LabeledWord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t stem_len = 2 + rng.below(11);
        std::string surface;
        for (std::size_t k = 0; k < stem_len; ++k) {
            utf8_append(surface, alphabet[rng.below(alphabet_size)]);
        }
        const auto& rule = rules[rng.below(rules.size())];
        surface += rule.suffix;
        const int label = rng.uniform01() < rule.utrum_probability ? 1 : 0;
        out.push_back({std::move(surface), label});
    }
    return out;
}

const std::vector<std::string>& default_drop_suffixes() {
    static const std::vector<std::string> list = {"ing", "tion", "het", "ist", "eri"};
    return list;
}

const std::vector<std::string>& default_stat_suffixes() {
    static const std::vector<std::string> list = {"het", "tion", "ist",  "ing", "are",
                                                  "skop", "eri", "gram", "ande"};
    return list;
}

}  // namespace gendernet
