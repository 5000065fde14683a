#pragma once

#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "latte/data.hpp"
#include "latte/errors.hpp"

namespace latte {

// Desk-scale synthetic corpus: entity names built from type-correlated
// token pools plus one unique token per entity; mentions are corrupted
// names (char drop, token swap, synonym substitution) in type-correlated
// contexts. Same seed, same bytes.
struct SynthSpec {
    std::uint64_t seed = 7;
    std::size_t n_entities = 200;
    std::size_t n_train = 1000;
    std::size_t n_dev = 200;
    std::size_t n_test = 200;
    std::size_t known_types = 8;
};

struct SynthOutput {
    KnowledgeBase kb;
    std::vector<MentionRecord> mentions;
    std::map<std::size_t, std::string> type_names;
};

namespace synth_detail {

inline std::string rand_token(std::mt19937_64& rng, std::size_t min_len,
                              std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(min_len, max_len);
    std::uniform_int_distribution<int> ch(0, 19);
    std::string s;
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i)
        s.push_back(static_cast<char>('a' + ch(rng)));
    return s;
}

}  // namespace synth_detail

inline SynthOutput synth_generate(const SynthSpec& spec) {
    if (spec.n_entities > 500)
        throw ConfigError("synth_generate: at most 500 entities");
    if (spec.n_entities < spec.known_types)
        throw ConfigError("synth_generate: need at least one entity per type");
    std::mt19937_64 rng(spec.seed);
    SynthOutput out;

    const std::size_t K = spec.known_types;
    std::vector<std::vector<std::string>> type_tokens(K), context_tokens(K);
    for (std::size_t t = 0; t < K; ++t) {
        for (int i = 0; i < 12; ++i)
            type_tokens[t].push_back(synth_detail::rand_token(rng, 5, 8));
        for (int i = 0; i < 10; ++i)
            context_tokens[t].push_back(synth_detail::rand_token(rng, 4, 7));
        out.type_names[t] = "type-" + std::to_string(t);
    }

    std::uniform_real_distribution<double> coin(0.0, 1.0);
    std::vector<std::size_t> primary_type(spec.n_entities);
    for (std::size_t i = 0; i < spec.n_entities; ++i) {
        const std::size_t t = i % K;
        primary_type[i] = t;
        CandidateEntity e;
        char buf[24];
        std::snprintf(buf, sizeof buf, "E%04zu", i);
        e.entity_id = buf;
        std::uniform_int_distribution<std::size_t> pick(
            0, type_tokens[t].size() - 1);
        e.name = type_tokens[t][pick(rng)] + " " +
                 synth_detail::rand_token(rng, 6, 9);
        if (coin(rng) < 0.5)
            e.name += " " + type_tokens[t][pick(rng)];
        e.known_type_ids.insert(t);
        if (coin(rng) < 0.2) {
            std::uniform_int_distribution<std::size_t> other(0, K - 1);
            e.known_type_ids.insert(other(rng));
        }
        out.kb.add(std::move(e));
    }

    const std::size_t total = spec.n_train + spec.n_dev + spec.n_test;
    for (std::size_t i = 0; i < total; ++i) {
        // round-robin first so every entity is seen in training
        std::size_t ei;
        if (i < spec.n_entities && spec.n_entities <= spec.n_train) {
            ei = i;
        } else {
            std::uniform_int_distribution<std::size_t> pe(
                0, spec.n_entities - 1);
            ei = pe(rng);
        }
        const auto& entity = out.kb.entities[ei];
        const std::size_t t = primary_type[ei];

        auto toks = tokenize(entity.name);
        // one corruption; at least one token always survives intact so the
        // mention shares a character trigram with the gold name
        std::uniform_int_distribution<int> kind(0, 2);
        switch (kind(rng)) {
            case 0: {  // drop one char from one token
                std::uniform_int_distribution<std::size_t> pt(0,
                                                              toks.size() - 1);
                std::string& tok = toks[pt(rng)];
                if (tok.size() > 4) {
                    std::uniform_int_distribution<std::size_t> pc(
                        0, tok.size() - 1);
                    tok.erase(pc(rng), 1);
                }
                break;
            }
            case 1: {  // swap two tokens
                if (toks.size() >= 2) std::swap(toks[0], toks.back());
                break;
            }
            case 2: {  // replace a type token with a pool sibling
                std::uniform_int_distribution<std::size_t> pick(
                    0, type_tokens[t].size() - 1);
                if (toks.size() >= 2) toks[0] = type_tokens[t][pick(rng)];
                break;
            }
        }

        MentionRecord m;
        char buf[24];
        std::snprintf(buf, sizeof buf, "D%04zu", i / 10);
        m.doc_id = buf;
        m.split = i < spec.n_train            ? "train"
                  : i < spec.n_train + spec.n_dev ? "dev"
                                                  : "test";
        m.mention = toks[0];
        for (std::size_t j = 1; j < toks.size(); ++j)
            m.mention += " " + toks[j];
        std::uniform_int_distribution<std::size_t> nctx(0, 5);
        std::uniform_int_distribution<std::size_t> pc(
            0, context_tokens[t].size() - 1);
        for (std::size_t j = nctx(rng); j > 0; --j)
            m.left_context.push_back(context_tokens[t][pc(rng)]);
        for (std::size_t j = nctx(rng); j > 0; --j)
            m.right_context.push_back(context_tokens[t][pc(rng)]);
        m.gold_entity_id = entity.entity_id;
        m.known_type_ids = entity.known_type_ids;
        out.mentions.push_back(std::move(m));
    }
    return out;
}

inline void synth_write(const SynthOutput& data, const std::string& dir) {
    save_kb(data.kb, dir + "/kb.jsonl");
    save_mentions(data.mentions, dir + "/mentions.jsonl");
    save_types(data.type_names, dir + "/types.jsonl");
}

}  // namespace latte
