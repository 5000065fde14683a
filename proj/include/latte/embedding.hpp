#pragma once

#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latte/errors.hpp"
#include "latte/tensor.hpp"
#include "latte/vocab.hpp"

namespace latte {

// Word table + character table + one conv filter bank per kernel width.
// Row 0 (PAD) of both tables stays all-zero; the trainer masks its gradient.
struct EmbeddingParams {
    std::size_t d_word = 0;
    std::size_t d_char = 0;
    std::size_t d_cnn = 0;                 // sum of filter counts
    std::vector<std::size_t> kernel_widths;  // e.g. {3,4,5}
    std::vector<std::size_t> filter_counts;  // near-equal, sums to d_cnn
    Tensor word_table;                     // [V x d_word]
    Tensor char_table;                     // [C x d_char]
    std::vector<Tensor> conv_w;            // per width: [k*d_char x F]
    std::vector<Tensor> conv_b;            // per width: [1 x F]

    static EmbeddingParams init(const Vocabulary& vocab, std::size_t d_word,
                                std::size_t d_char, std::size_t d_cnn,
                                std::mt19937_64& rng) {
        EmbeddingParams p;
        p.d_word = d_word;
        p.d_char = d_char;
        p.kernel_widths = {3, 4, 5};
        p.d_cnn = d_cnn;
        const std::size_t nw = p.kernel_widths.size();
        if (d_cnn < nw)
            throw ConfigError("d_cnn must be at least " + std::to_string(nw));
        for (std::size_t i = 0; i < nw; ++i)
            p.filter_counts.push_back(d_cnn / nw + (i < d_cnn % nw ? 1 : 0));
        std::uniform_real_distribution<double> u(-0.05, 0.05);
        auto table = [&](std::size_t rows, std::size_t cols) {
            std::vector<double> v(rows * cols);
            for (auto& x : v) x = u(rng);
            std::fill(v.begin(), v.begin() + cols, 0.0);  // PAD row
            return make_tensor({rows, cols}, std::move(v), true);
        };
        p.word_table = table(vocab.word_count(), d_word);
        p.char_table = table(vocab.char_count(), d_char);
        for (std::size_t w = 0; w < nw; ++w) {
            const std::size_t k = p.kernel_widths[w];
            const std::size_t f = p.filter_counts[w];
            const double bound = 1.0 / std::sqrt(static_cast<double>(k * d_char));
            std::uniform_real_distribution<double> uw(-bound, bound);
            std::vector<double> wv(k * d_char * f);
            for (auto& x : wv) x = uw(rng);
            p.conv_w.push_back(
                make_tensor({k * d_char, f}, std::move(wv), true));
            p.conv_b.push_back(make_zeros({1, f}, true));
        }
        return p;
    }

    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out = {word_table, char_table};
        out.insert(out.end(), conv_w.begin(), conv_w.end());
        out.insert(out.end(), conv_b.begin(), conv_b.end());
        return out;
    }

    // PAD rows are frozen: drop whatever gradient the lookup scattered there
    void mask_pad_grads() const {
        auto zero_row0 = [](const Tensor& t) {
            if (t->grad.empty()) return;
            std::fill(t->grad.begin(), t->grad.begin() + t->shape[1], 0.0);
        };
        zero_row0(word_table);
        zero_row0(char_table);
    }
};

// GloVe-style text format: "token v1 v2 ... vd". In-vocab rows are loaded;
// vocab words absent from the file keep their seeded uniform(-0.05,0.05)
// init. Returns the OOV rate over non-special vocabulary entries.
inline double load_pretrained(const std::string& path, const Vocabulary& vocab,
                              EmbeddingParams& params) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open embedding file: " + path);
    const std::size_t d = params.d_word;
    std::string line;
    std::size_t line_no = 0, found = 0;
    std::vector<bool> seen(vocab.word_count(), false);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        std::vector<double> vec;
        double x;
        while (ls >> x) vec.push_back(x);
        if (vec.size() != d)
            throw FormatError("embedding file line " + std::to_string(line_no) +
                              ": expected " + std::to_string(d) +
                              " values, got " + std::to_string(vec.size()));
        const std::size_t id = vocab.word_id(tok);
        if (id <= Vocabulary::kUnk || seen[id]) continue;
        seen[id] = true;
        ++found;
        std::copy(vec.begin(), vec.end(),
                  params.word_table->value.begin() + id * d);
    }
    const std::size_t n = vocab.word_count() - 2;
    return n == 0 ? 0.0
                  : 1.0 - static_cast<double>(found) / static_cast<double>(n);
}

// Character CNN over one word: per kernel width, 1-D convolution over the
// char embedding sequence, ReLU, max-pool over window positions that start
// at a real character; outputs concatenated across widths.
inline Tensor char_cnn(Graph& g, const std::vector<std::size_t>& char_ids,
                       const EmbeddingParams& params) {
    if (char_ids.empty()) throw ValueError("char_cnn: empty word");
    const std::size_t kmax =
        *std::max_element(params.kernel_widths.begin(),
                          params.kernel_widths.end());
    std::vector<std::size_t> padded = char_ids;
    while (padded.size() < kmax) padded.push_back(Vocabulary::kPad);
    Tensor emb = rows_lookup(g, params.char_table, padded);
    std::vector<Tensor> pooled;
    for (std::size_t w = 0; w < params.kernel_widths.size(); ++w) {
        const std::size_t k = params.kernel_widths[w];
        Tensor win = windows(g, emb, k);
        Tensor conv = relu(g, add(g, matmul(g, win, params.conv_w[w]),
                                  params.conv_b[w]));
        const std::size_t valid = std::min(conv->shape[0], char_ids.size());
        pooled.push_back(col_max(g, conv, valid));
    }
    return concat(g, pooled, 1);  // [1 x d_cnn]
}

struct EmbeddedSequence {
    Tensor matrix;                    // [L x (d_word + d_cnn)]
    std::vector<std::uint8_t> mask;   // 1 at real tokens
    std::size_t length = 0;           // unpadded token count (<= L)
};

// Per-graph memo of finished token rows. Valid only within one Graph: the
// cached nodes reference the current tape, and reuse just fans the same
// subgraph out to several consumers.
struct EmbedCache {
    std::map<std::string, Tensor> word_rows;
};

// Pad/truncate to L, then per position concat(word embedding, char CNN).
// PAD rows are exactly zero.
inline EmbeddedSequence embed_sequence(Graph& g,
                                       const std::vector<std::string>& tokens,
                                       const EmbeddingParams& params,
                                       const Vocabulary& vocab,
                                       std::size_t max_len,
                                       EmbedCache* cache = nullptr) {
    EmbeddedSequence out;
    std::size_t n_tokens = tokens.size();
    while (n_tokens > 0 && tokens[n_tokens - 1] == "<pad>") --n_tokens;
    out.length = std::min(n_tokens, max_len);
    out.mask.assign(max_len, 0);
    std::vector<Tensor> rows;
    rows.reserve(max_len);
    for (std::size_t t = 0; t < max_len; ++t) {
        if (t < out.length) {
            out.mask[t] = 1;
            const std::string& tok = tokens[t];
            if (cache) {
                auto it = cache->word_rows.find(tok);
                if (it != cache->word_rows.end()) {
                    rows.push_back(it->second);
                    continue;
                }
            }
            Tensor word = rows_lookup(g, params.word_table,
                                      {vocab.word_id(tok)});
            std::vector<std::size_t> cids;
            cids.reserve(tok.size());
            for (char c : tok) cids.push_back(vocab.char_id(c));
            Tensor row = concat(g, {word, char_cnn(g, cids, params)}, 1);
            if (cache) cache->word_rows.emplace(tok, row);
            rows.push_back(row);
        } else {
            rows.push_back(make_zeros({1, params.d_word + params.d_cnn}));
        }
    }
    out.matrix = concat(g, rows, 0);
    return out;
}

}  // namespace latte
