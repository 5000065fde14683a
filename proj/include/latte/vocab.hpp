#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "latte/errors.hpp"

namespace latte {

// Lowercase, split on whitespace and punctuation boundaries. Digits and
// letters stick together; every punctuation character becomes its own token.
inline std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (unsigned char ch : text) {
        const char c = static_cast<char>(std::tolower(ch));
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        } else {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
            if (!std::isspace(static_cast<unsigned char>(c)))
                out.push_back(std::string(1, c));
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

// Word and character vocabularies with fixed PAD=0, UNK=1 slots.
class Vocabulary {
public:
    static constexpr std::size_t kPad = 0;
    static constexpr std::size_t kUnk = 1;

    std::size_t word_count() const { return id_to_word_.size(); }
    std::size_t char_count() const { return id_to_char_.size(); }

    std::size_t word_id(const std::string& w) const {
        auto it = word_to_id_.find(w);
        return it == word_to_id_.end() ? kUnk : it->second;
    }
    std::size_t char_id(char c) const {
        auto it = char_to_id_.find(c);
        return it == char_to_id_.end() ? kUnk : it->second;
    }
    const std::string& word(std::size_t id) const { return id_to_word_.at(id); }

    const std::vector<std::string>& words() const { return id_to_word_; }

    // Deterministic ids: frequency descending, then lexicographic. Words
    // below min_count map to UNK.
    static Vocabulary build(const std::vector<std::vector<std::string>>& corpus,
                            std::size_t min_count = 1) {
        if (corpus.empty()) throw ValueError("build_vocab: empty corpus");
        std::map<std::string, std::size_t> freq;
        std::map<char, std::size_t> cfreq;
        for (const auto& seq : corpus)
            for (const auto& tok : seq) {
                ++freq[tok];
                for (char c : tok) ++cfreq[c];
            }
        std::vector<std::pair<std::string, std::size_t>> entries(freq.begin(),
                                                                 freq.end());
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                  });
        Vocabulary v;
        v.id_to_word_ = {"<pad>", "<unk>"};
        for (const auto& [w, n] : entries) {
            if (n < min_count) continue;
            v.word_to_id_[w] = v.id_to_word_.size();
            v.id_to_word_.push_back(w);
        }
        std::vector<std::pair<char, std::size_t>> centries(cfreq.begin(),
                                                           cfreq.end());
        std::sort(centries.begin(), centries.end(),
                  [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                  });
        v.id_to_char_ = {'\0', '\1'};
        for (const auto& [c, n] : centries) {
            v.char_to_id_[c] = v.id_to_char_.size();
            v.id_to_char_.push_back(c);
        }
        return v;
    }

    // checkpoint support
    void set_words(std::vector<std::string> words) {
        id_to_word_ = std::move(words);
        word_to_id_.clear();
        for (std::size_t i = 2; i < id_to_word_.size(); ++i)
            word_to_id_[id_to_word_[i]] = i;
    }
    void set_chars(std::vector<char> chars) {
        id_to_char_ = std::move(chars);
        char_to_id_.clear();
        for (std::size_t i = 2; i < id_to_char_.size(); ++i)
            char_to_id_[id_to_char_[i]] = i;
    }
    const std::vector<char>& chars() const { return id_to_char_; }

private:
    std::unordered_map<std::string, std::size_t> word_to_id_;
    std::vector<std::string> id_to_word_;
    std::unordered_map<char, std::size_t> char_to_id_;
    std::vector<char> id_to_char_;
};

}  // namespace latte
