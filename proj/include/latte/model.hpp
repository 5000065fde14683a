#pragma once

#include <cstring>
#include <fstream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "latte/adam.hpp"
#include "latte/config.hpp"
#include "latte/embedding.hpp"
#include "latte/errors.hpp"
#include "latte/lstm.hpp"
#include "latte/match.hpp"
#include "latte/vocab.hpp"

namespace latte {

// All learnable state plus the vocabulary it was built over. The mention
// and candidate sides share every component (one encoder, one latent
// projection, one known-type head).
struct Model {
    Vocabulary vocab;
    EmbeddingParams embedding;
    LstmParams lstm;
    AttentionParams attention;
    TypeParams type;
    FusionParams fusion;

    static Model init(const Vocabulary& vocab, const RunConfig& cfg,
                      std::mt19937_64& rng) {
        Model m;
        m.vocab = vocab;
        m.embedding = EmbeddingParams::init(vocab, cfg.d_word, cfg.d_char,
                                            cfg.d_cnn, rng);
        m.lstm = LstmParams::init(cfg.d_word + m.embedding.d_cnn, cfg.hidden,
                                  cfg.lstm_layers, rng);
        const std::size_t enc_width = 2 * cfg.hidden;
        m.attention =
            AttentionParams::init(enc_width, cfg.max_len, cfg.ff_hidden, rng);
        m.type = TypeParams::init(enc_width, cfg.max_len, cfg.latent_count,
                                  cfg.known_count, rng);
        m.fusion = FusionParams::init();
        return m;
    }

    // fixed order; the checkpoint and optimizer both rely on it
    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out;
        auto append = [&](const std::vector<Tensor>& v) {
            out.insert(out.end(), v.begin(), v.end());
        };
        append(embedding.parameters());
        append(lstm.parameters());
        append(attention.parameters());
        append(type.parameters());
        append(fusion.parameters());
        return out;
    }
};

// Everything the pair scorer needs from one side of the pair.
struct EncodedSequence {
    Tensor u;  // [L x 2h]
    std::vector<std::uint8_t> mask;
    LatentDistribution latent;
    Tensor known_scores;  // [1 x K]
};

// Per-graph memo for repeated token rows and whole sequences. Reuse only
// fans shared subgraphs out to several consumers, so cached and uncached
// paths produce bitwise-identical values and gradients.
struct EncodeCache {
    EmbedCache words;
    std::map<std::string, EncodedSequence> sequences;

    static std::string key(const std::vector<std::string>& tokens) {
        std::string k;
        for (const auto& t : tokens) {
            k += t;
            k.push_back('\x1f');
        }
        return k;
    }
};

inline EncodedSequence encode_sequence(Graph& g, const Model& model,
                                       const std::vector<std::string>& tokens,
                                       const RunConfig& cfg,
                                       EncodeCache* cache = nullptr) {
    std::string key;
    if (cache) {
        key = EncodeCache::key(tokens);
        auto it = cache->sequences.find(key);
        if (it != cache->sequences.end()) return it->second;
    }
    EncodedSequence enc;
    EmbeddedSequence emb =
        embed_sequence(g, tokens, model.embedding, model.vocab, cfg.max_len,
                       cache ? &cache->words : nullptr);
    enc.mask = emb.mask;
    enc.u = bilstm_encode(g, emb.matrix, emb.mask, model.lstm);
    enc.latent = latent_type_distribution(g, enc.u, model.type);
    enc.known_scores = known_type_scores(g, enc.latent.v, model.type);
    if (cache) cache->sequences.emplace(std::move(key), enc);
    return enc;
}

struct PairScore {
    Tensor f;  // attention relevance
    Tensor g;  // latent-type similarity
    Tensor r;  // fused ranking score
};

// Full head over two encoded sequences. With the latent path disabled the
// fused score is the attention score alone, so no gradient reaches the
// latent projection through r.
inline PairScore score_encoded(Graph& g, const Model& model,
                               const EncodedSequence& mention,
                               const EncodedSequence& candidate,
                               const RunConfig& cfg) {
    PairScore out;
    Tensor s = similarity_matrix(g, candidate.u, mention.u, model.attention);
    AttentionOutput att = bidirectional_attention(
        g, s, candidate.u, mention.u, candidate.mask, mention.mask);
    out.f = attention_relevance(g, att.x, model.attention);
    out.g = latent_type_similarity(g, mention.latent.v_hat,
                                   candidate.latent.v_hat);
    if (variant_uses_latent(cfg.variant))
        out.r = rank_score(g, out.f, out.g, model.fusion);
    else
        out.r = out.f;
    return out;
}

// One mention against many candidates, with the feed-forward head batched
// across the pairs. Scores match score_encoded pair by pair.
inline std::vector<PairScore> score_candidates(
    Graph& g, const Model& model, const EncodedSequence& mention,
    const std::vector<EncodedSequence>& candidates, const RunConfig& cfg) {
    std::vector<Tensor> xs, gs;
    xs.reserve(candidates.size());
    gs.reserve(candidates.size());
    for (const auto& cand : candidates) {
        Tensor s = similarity_matrix(g, cand.u, mention.u, model.attention);
        AttentionOutput att = bidirectional_attention(
            g, s, cand.u, mention.u, cand.mask, mention.mask);
        xs.push_back(att.x);
        gs.push_back(latent_type_similarity(g, mention.latent.v_hat,
                                            cand.latent.v_hat));
    }
    std::vector<Tensor> fs = attention_relevance_batch(g, xs, model.attention);
    std::vector<PairScore> out(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        out[i].f = fs[i];
        out[i].g = gs[i];
        out[i].r = variant_uses_latent(cfg.variant)
                       ? rank_score(g, fs[i], gs[i], model.fusion)
                       : fs[i];
    }
    return out;
}

inline PairScore score_pair(Graph& g, const Model& model,
                            const std::vector<std::string>& mention_tokens,
                            const std::vector<std::string>& candidate_tokens,
                            const RunConfig& cfg) {
    EncodedSequence m = encode_sequence(g, model, mention_tokens, cfg);
    EncodedSequence c = encode_sequence(g, model, candidate_tokens, cfg);
    return score_encoded(g, model, m, c, cfg);
}

// ---- checkpoint ----------------------------------------------------------

struct EpochMetrics {
    std::uint64_t epoch = 0;
    double train_loss = 0.0;
    double dev_p1 = 0.0;
    double dev_map = 0.0;
};

struct Checkpoint {
    RunConfig config;
    Model model;
    std::uint64_t epoch = 0;
    std::vector<EpochMetrics> history;
    // optimizer state; empty when saved without one
    bool has_optimizer = false;
    std::uint64_t adam_t = 0;
    std::vector<std::vector<double>> adam_m, adam_v;
};

namespace ckpt_detail {

constexpr char kMagic[8] = {'L', 'A', 'T', 'T', 'E', 'C', 'P', '1'};

inline void write_u64(std::ostream& out, std::uint64_t x) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(x >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}
inline std::uint64_t read_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    if (!in) throw FormatError("checkpoint truncated");
    std::uint64_t x = 0;
    for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return x;
}
inline void write_doubles(std::ostream& out, const std::vector<double>& v) {
    write_u64(out, v.size());
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}
inline std::vector<double> read_doubles(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw FormatError("checkpoint truncated");
    return v;
}
inline void write_string(std::ostream& out, const std::string& s) {
    write_u64(out, s.size());
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}
inline std::string read_string(std::istream& in) {
    const std::uint64_t n = read_u64(in);
    std::string s(n, '\0');
    in.read(s.data(), static_cast<std::streamsize>(n));
    if (!in) throw FormatError("checkpoint truncated");
    return s;
}

}  // namespace ckpt_detail

inline void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot write checkpoint: " + path);
    using namespace ckpt_detail;
    out.write(kMagic, 8);
    write_string(out, ckpt.config.to_json().dump());

    write_u64(out, ckpt.model.vocab.words().size());
    for (const auto& w : ckpt.model.vocab.words()) write_string(out, w);
    const auto& chars = ckpt.model.vocab.chars();
    write_string(out, std::string(chars.begin(), chars.end()));

    auto params = ckpt.model.parameters();
    write_u64(out, params.size());
    for (const auto& p : params) {
        write_u64(out, p->shape.size());
        for (std::size_t d : p->shape) write_u64(out, d);
        write_doubles(out, p->value);
    }

    out.put(ckpt.has_optimizer ? 1 : 0);
    if (ckpt.has_optimizer) {
        write_u64(out, ckpt.adam_t);
        write_u64(out, ckpt.adam_m.size());
        for (std::size_t i = 0; i < ckpt.adam_m.size(); ++i) {
            write_doubles(out, ckpt.adam_m[i]);
            write_doubles(out, ckpt.adam_v[i]);
        }
    }

    write_u64(out, ckpt.epoch);
    write_u64(out, ckpt.history.size());
    for (const auto& h : ckpt.history) {
        write_u64(out, h.epoch);
        write_doubles(out, {h.train_loss, h.dev_p1, h.dev_map});
    }
    if (!out) throw FormatError("short write on checkpoint: " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint: " + path);
    using namespace ckpt_detail;
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kMagic, 8) != 0)
        throw FormatError("not a checkpoint file: " + path);
    Checkpoint ckpt;
    ckpt.config = RunConfig::from_json(nlohmann::json::parse(read_string(in)));

    const std::uint64_t nwords = read_u64(in);
    std::vector<std::string> words(nwords);
    for (auto& w : words) w = read_string(in);
    std::string chars = read_string(in);
    Vocabulary vocab;
    vocab.set_words(std::move(words));
    vocab.set_chars(std::vector<char>(chars.begin(), chars.end()));

    std::mt19937_64 rng(ckpt.config.seed);
    ckpt.model = Model::init(vocab, ckpt.config, rng);
    auto params = ckpt.model.parameters();
    const std::uint64_t nparams = read_u64(in);
    if (nparams != params.size())
        throw FormatError("checkpoint parameter count mismatch");
    for (auto& p : params) {
        const std::uint64_t ndims = read_u64(in);
        std::vector<std::size_t> shape(ndims);
        for (auto& d : shape) d = read_u64(in);
        if (shape != p->shape)
            throw FormatError("checkpoint tensor shape mismatch: expected " +
                              shape_str(p->shape) + ", got " +
                              shape_str(shape));
        p->value = read_doubles(in);
        if (p->value.size() != shape_numel(shape))
            throw FormatError("checkpoint tensor length mismatch");
    }

    ckpt.has_optimizer = in.get() == 1;
    if (ckpt.has_optimizer) {
        ckpt.adam_t = read_u64(in);
        const std::uint64_t n = read_u64(in);
        for (std::uint64_t i = 0; i < n; ++i) {
            ckpt.adam_m.push_back(read_doubles(in));
            ckpt.adam_v.push_back(read_doubles(in));
        }
    }

    ckpt.epoch = read_u64(in);
    const std::uint64_t nh = read_u64(in);
    for (std::uint64_t i = 0; i < nh; ++i) {
        EpochMetrics h;
        h.epoch = read_u64(in);
        auto v = read_doubles(in);
        if (v.size() != 3) throw FormatError("checkpoint history corrupt");
        h.train_loss = v[0];
        h.dev_p1 = v[1];
        h.dev_map = v[2];
        ckpt.history.push_back(h);
    }
    return ckpt;
}

}  // namespace latte
