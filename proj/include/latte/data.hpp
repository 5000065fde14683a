#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "latte/errors.hpp"
#include "latte/vocab.hpp"

namespace latte {

struct CandidateEntity {
    std::string entity_id;
    std::string name;
    std::set<std::size_t> known_type_ids;
};

struct KnowledgeBase {
    std::vector<CandidateEntity> entities;
    std::unordered_map<std::string, std::size_t> by_id;

    void add(CandidateEntity e) {
        if (by_id.count(e.entity_id))
            throw IntegrityError("duplicate entity_id: " + e.entity_id);
        by_id[e.entity_id] = entities.size();
        entities.push_back(std::move(e));
    }
    const CandidateEntity& get(const std::string& id) const {
        auto it = by_id.find(id);
        if (it == by_id.end())
            throw IntegrityError("unknown entity_id: " + id);
        return entities[it->second];
    }
    bool contains(const std::string& id) const { return by_id.count(id) > 0; }
};

struct MentionRecord {
    std::string doc_id;
    std::string split;  // train / dev / test
    std::string mention;
    std::vector<std::string> left_context;   // <= 5 tokens
    std::vector<std::string> right_context;  // <= 5 tokens
    std::string gold_entity_id;
    std::set<std::size_t> known_type_ids;

    // mention phrase = left context + mention tokens + right context
    std::vector<std::string> phrase_tokens() const {
        std::vector<std::string> out = left_context;
        auto m = tokenize(mention);
        out.insert(out.end(), m.begin(), m.end());
        out.insert(out.end(), right_context.begin(), right_context.end());
        return out;
    }
};

struct LinkingInstance {
    MentionRecord mention;
    CandidateEntity positive;
    std::vector<CandidateEntity> negatives;
};

// ---- character n-gram TF-IDF retrieval -----------------------------------

// All contiguous character n-grams for each n in [n_min, n_max], as a
// multiset (gram -> count). No boundary padding markers.
inline std::map<std::string, std::size_t> char_ngrams(const std::string& s,
                                                      std::size_t n_min = 1,
                                                      std::size_t n_max = 5) {
    std::string t;
    for (unsigned char c : s)
        t.push_back(static_cast<char>(std::tolower(c)));
    // trim
    const auto b = t.find_first_not_of(" \t\r\n");
    const auto e = t.find_last_not_of(" \t\r\n");
    if (b == std::string::npos)
        throw ValueError("char_ngrams: empty string");
    t = t.substr(b, e - b + 1);
    std::map<std::string, std::size_t> grams;
    for (std::size_t n = n_min; n <= n_max; ++n)
        for (std::size_t i = 0; i + n <= t.size(); ++i)
            ++grams[t.substr(i, n)];
    return grams;
}

// TF-IDF index over KB entity names. TF is the raw count; IDF is the
// smoothed ln((1+N)/(1+df)) + 1; vectors are L2-normalized so scores are
// cosines in [0, 1].
class TfIdfIndex {
public:
    explicit TfIdfIndex(const KnowledgeBase& kb, std::size_t n_min = 1,
                        std::size_t n_max = 5)
        : n_min_(n_min), n_max_(n_max) {
        const std::size_t n_docs = kb.entities.size();
        std::map<std::string, std::size_t> df;
        std::vector<std::map<std::string, std::size_t>> tfs;
        tfs.reserve(n_docs);
        for (const auto& e : kb.entities) {
            auto grams = char_ngrams(e.name, n_min_, n_max_);
            for (const auto& [gram, cnt] : grams) ++df[gram];
            tfs.push_back(std::move(grams));
        }
        for (const auto& [gram, d] : df)
            idf_[gram] = std::log((1.0 + static_cast<double>(n_docs)) /
                                  (1.0 + static_cast<double>(d))) +
                         1.0;
        doc_vecs_.reserve(n_docs);
        for (auto& tf : tfs) doc_vecs_.push_back(weigh(tf));
    }

    double score(const std::string& query, std::size_t doc_index) const {
        return dot(query_vec(query), doc_vecs_.at(doc_index));
    }

    // cosine of the query against every indexed entity name
    std::vector<double> score_all(const std::string& query) const {
        auto q = query_vec(query);
        std::vector<double> out;
        out.reserve(doc_vecs_.size());
        for (const auto& d : doc_vecs_) out.push_back(dot(q, d));
        return out;
    }

private:
    using Vec = std::map<std::string, double>;

    Vec weigh(const std::map<std::string, std::size_t>& tf) const {
        Vec v;
        double norm2 = 0.0;
        for (const auto& [gram, cnt] : tf) {
            auto it = idf_.find(gram);
            if (it == idf_.end()) continue;
            const double w = static_cast<double>(cnt) * it->second;
            v[gram] = w;
            norm2 += w * w;
        }
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (auto& [gram, w] : v) w *= inv;
        }
        return v;
    }

    Vec query_vec(const std::string& query) const {
        return weigh(char_ngrams(query, n_min_, n_max_));
    }

    static double dot(const Vec& a, const Vec& b) {
        const Vec& small = a.size() <= b.size() ? a : b;
        const Vec& big = a.size() <= b.size() ? b : a;
        double s = 0.0;
        for (const auto& [gram, w] : small) {
            auto it = big.find(gram);
            if (it != big.end()) s += w * it->second;
        }
        return s;
    }

    std::size_t n_min_, n_max_;
    std::map<std::string, double> idf_;
    std::vector<Vec> doc_vecs_;
};

// Top-N TF-IDF negatives (gold excluded), ties broken by ascending
// entity_id. The gold entity always becomes the positive.
inline LinkingInstance generate_candidates(const MentionRecord& mention,
                                           const KnowledgeBase& kb,
                                           const TfIdfIndex& index,
                                           std::size_t n_negatives = 9) {
    if (kb.entities.size() < n_negatives + 1)
        throw ConfigError("knowledge base too small: need at least " +
                          std::to_string(n_negatives + 1) + " entities");
    auto scores = index.score_all(mention.mention);
    std::vector<std::size_t> order;
    order.reserve(kb.entities.size());
    for (std::size_t i = 0; i < kb.entities.size(); ++i)
        if (kb.entities[i].entity_id != mention.gold_entity_id)
            order.push_back(i);
    std::partial_sort(order.begin(),
                      order.begin() + static_cast<std::ptrdiff_t>(std::min(
                                          n_negatives, order.size())),
                      order.end(), [&](std::size_t a, std::size_t b) {
                          if (scores[a] != scores[b])
                              return scores[a] > scores[b];
                          return kb.entities[a].entity_id <
                                 kb.entities[b].entity_id;
                      });
    LinkingInstance inst;
    inst.mention = mention;
    inst.positive = kb.get(mention.gold_entity_id);
    for (std::size_t i = 0; i < n_negatives; ++i)
        inst.negatives.push_back(kb.entities[order[i]]);
    return inst;
}

// ---- line-delimited JSON dataset files -----------------------------------

struct Dataset {
    KnowledgeBase kb;
    std::vector<MentionRecord> mentions;
    std::map<std::size_t, std::string> type_names;

    std::vector<const MentionRecord*> split(const std::string& name) const {
        std::vector<const MentionRecord*> out;
        for (const auto& m : mentions)
            if (m.split == name) out.push_back(&m);
        return out;
    }
};

inline void save_kb(const KnowledgeBase& kb, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (const auto& e : kb.entities) {
        nlohmann::json j;
        j["entity_id"] = e.entity_id;
        j["name"] = e.name;
        j["known_type_ids"] = e.known_type_ids;
        out << j.dump() << "\n";
    }
}

inline void save_mentions(const std::vector<MentionRecord>& mentions,
                          const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (const auto& m : mentions) {
        nlohmann::json j;
        j["doc_id"] = m.doc_id;
        j["split"] = m.split;
        j["mention"] = m.mention;
        j["left_context"] = m.left_context;
        j["right_context"] = m.right_context;
        j["gold_entity_id"] = m.gold_entity_id;
        j["known_type_ids"] = m.known_type_ids;
        out << j.dump() << "\n";
    }
}

inline void save_types(const std::map<std::size_t, std::string>& types,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write " + path);
    for (const auto& [id, name] : types) {
        nlohmann::json j;
        j["type_id"] = id;
        j["type_name"] = name;
        out << j.dump() << "\n";
    }
}

namespace detail {
inline nlohmann::json parse_line(const std::string& line,
                                 const std::string& path, std::size_t ln) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ":" + std::to_string(ln) +
                          ": malformed record: " + e.what());
    }
}
}  // namespace detail

// Loads the three files from a directory and validates referential
// integrity (gold ids exist in the KB, contexts <= 5 tokens, type ids in
// the type vocabulary when one is present).
inline Dataset load_dataset(const std::string& dir) {
    Dataset ds;
    const std::string kb_path = dir + "/kb.jsonl";
    const std::string mention_path = dir + "/mentions.jsonl";
    const std::string types_path = dir + "/types.jsonl";

    std::ifstream kb_in(kb_path);
    if (!kb_in) throw FormatError("cannot open " + kb_path);
    std::string line;
    std::size_t ln = 0;
    while (std::getline(kb_in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto j = detail::parse_line(line, kb_path, ln);
        CandidateEntity e;
        try {
            e.entity_id = j.at("entity_id").get<std::string>();
            e.name = j.at("name").get<std::string>();
            for (const auto& t : j.at("known_type_ids"))
                e.known_type_ids.insert(t.get<std::size_t>());
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError(kb_path + ":" + std::to_string(ln) + ": " +
                              ex.what());
        }
        ds.kb.add(std::move(e));
    }

    std::ifstream ty_in(types_path);
    if (ty_in) {
        ln = 0;
        while (std::getline(ty_in, line)) {
            ++ln;
            if (line.empty()) continue;
            auto j = detail::parse_line(line, types_path, ln);
            ds.type_names[j.at("type_id").get<std::size_t>()] =
                j.at("type_name").get<std::string>();
        }
    }

    std::ifstream m_in(mention_path);
    if (!m_in) throw FormatError("cannot open " + mention_path);
    ln = 0;
    while (std::getline(m_in, line)) {
        ++ln;
        if (line.empty()) continue;
        auto j = detail::parse_line(line, mention_path, ln);
        MentionRecord m;
        try {
            m.doc_id = j.at("doc_id").get<std::string>();
            m.split = j.at("split").get<std::string>();
            m.mention = j.at("mention").get<std::string>();
            m.left_context =
                j.at("left_context").get<std::vector<std::string>>();
            m.right_context =
                j.at("right_context").get<std::vector<std::string>>();
            m.gold_entity_id = j.at("gold_entity_id").get<std::string>();
            for (const auto& t : j.at("known_type_ids"))
                m.known_type_ids.insert(t.get<std::size_t>());
        } catch (const nlohmann::json::exception& ex) {
            throw FormatError(mention_path + ":" + std::to_string(ln) + ": " +
                              ex.what());
        }
        if (m.split != "train" && m.split != "dev" && m.split != "test")
            throw FormatError(mention_path + ":" + std::to_string(ln) +
                              ": unknown split '" + m.split + "'");
        if (m.left_context.size() > 5 || m.right_context.size() > 5)
            throw IntegrityError(mention_path + ":" + std::to_string(ln) +
                                 ": context window exceeds 5 tokens");
        if (!ds.kb.contains(m.gold_entity_id))
            throw IntegrityError(mention_path + ":" + std::to_string(ln) +
                                 ": gold entity '" + m.gold_entity_id +
                                 "' not in knowledge base");
        ds.mentions.push_back(std::move(m));
    }
    return ds;
}

}  // namespace latte
