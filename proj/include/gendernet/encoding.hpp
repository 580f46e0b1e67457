#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace gendernet {

// Character-to-index mapping over a word list. Real characters take indices
// 1..size() in ascending code-point order, so the mapping is identical for
// any permutation of the same words. Index 0 is reserved for padding and
// size()+1 for characters unseen at build time.
class Vocabulary {
public:
    static constexpr int pad_index = 0;

    // Builds the vocabulary over every character occurring in words.
    // Throws std::invalid_argument when words is empty.
    static Vocabulary build(const std::vector<std::string>& words);

    // Reconstructs from an index-ordered code point list (deserialization).
    // The list must be strictly ascending.
    static Vocabulary from_code_points(std::vector<char32_t> ordered);

    int size() const { return static_cast<int>(chars_.size()); }
    int unk_index() const { return size() + 1; }

    // Index for a character; unk_index() when the character is unknown.
    int index_of(char32_t c) const;

    // Character for an index in 1..size().
    char32_t char_at(int index) const;

    // Code points in index order (index i+1 maps to code_points()[i]).
    const std::vector<char32_t>& code_points() const { return chars_; }

private:
    Vocabulary() = default;
    std::vector<char32_t> chars_;
    std::unordered_map<char32_t, int> index_;
};

struct EncodedWord {
    std::vector<int> indices;  // length max_len, right-padded with 0
    int true_length = 0;
};

Vocabulary build_vocabulary(const std::vector<std::string>& words);

// Maps each character through vocab (unknown -> unk_index) and right-pads
// with zeros to max_len. Throws std::invalid_argument for an empty word and
// std::length_error when the word has more than max_len characters.
EncodedWord encode_word(std::string_view word, const Vocabulary& vocab, int max_len);

// Inverse of encode_word for words of known characters; stops at the first
// padding index. Unknown-marker indices decode to U+FFFD.
std::string decode_indices(const EncodedWord& encoded, const Vocabulary& vocab);

// Longest word length in the list, counted in Unicode scalar values.
int max_word_length(const std::vector<std::string>& words);

}  // namespace gendernet
