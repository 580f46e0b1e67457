#include "gendernet/encoding.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "gendernet/utf8.hpp"

namespace gendernet {

Vocabulary Vocabulary::build(const std::vector<std::string>& words) {
    if (words.empty()) throw std::invalid_argument("build_vocabulary: empty word list");
    std::set<char32_t> seen;
    for (const auto& w : words) {
        for (char32_t c : utf8_decode(w)) seen.insert(c);
    }
    return from_code_points(std::vector<char32_t>(seen.begin(), seen.end()));
}

Vocabulary Vocabulary::from_code_points(std::vector<char32_t> ordered) {
    if (!std::is_sorted(ordered.begin(), ordered.end()) ||
        std::adjacent_find(ordered.begin(), ordered.end()) != ordered.end()) {
        throw std::invalid_argument("Vocabulary: code points not strictly ascending");
    }
    Vocabulary v;
    v.chars_ = std::move(ordered);
    v.index_.reserve(v.chars_.size());
    for (std::size_t i = 0; i < v.chars_.size(); ++i) {
        v.index_.emplace(v.chars_[i], static_cast<int>(i) + 1);
    }
    return v;
}

int Vocabulary::index_of(char32_t c) const {
    const auto it = index_.find(c);
    return it == index_.end() ? unk_index() : it->second;
}

char32_t Vocabulary::char_at(int index) const {
    if (index < 1 || index > size()) {
        throw std::out_of_range("Vocabulary: no character at index " + std::to_string(index));
    }
    return chars_[static_cast<std::size_t>(index) - 1];
}

Vocabulary build_vocabulary(const std::vector<std::string>& words) {
    return Vocabulary::build(words);
}

EncodedWord encode_word(std::string_view word, const Vocabulary& vocab, int max_len) {
    if (word.empty()) throw std::invalid_argument("encode_word: empty word");
    const auto chars = utf8_decode(word);
    if (static_cast<int>(chars.size()) > max_len) {
        throw std::length_error("encode_word: word of " + std::to_string(chars.size()) +
                                " characters exceeds max_len " + std::to_string(max_len));
    }
    EncodedWord e;
    e.indices.assign(static_cast<std::size_t>(max_len), Vocabulary::pad_index);
    e.true_length = static_cast<int>(chars.size());
    for (std::size_t i = 0; i < chars.size(); ++i) {
        e.indices[i] = vocab.index_of(chars[i]);
    }
    return e;
}

std::string decode_indices(const EncodedWord& encoded, const Vocabulary& vocab) {
    std::string out;
    for (int idx : encoded.indices) {
        if (idx == Vocabulary::pad_index) break;
        if (idx < 0 || idx > vocab.unk_index()) {
            throw std::out_of_range("decode_indices: index " + std::to_string(idx) +
                                    " out of range for vocabulary of size " +
                                    std::to_string(vocab.size()));
        }
        utf8_append(out, idx == vocab.unk_index() ? char32_t{0xFFFD} : vocab.char_at(idx));
    }
    return out;
}

int max_word_length(const std::vector<std::string>& words) {
    std::size_t longest = 0;
    for (const auto& w : words) longest = std::max(longest, utf8_length(w));
    return static_cast<int>(longest);
}

}  // namespace gendernet
