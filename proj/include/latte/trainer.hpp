#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "latte/adam.hpp"
#include "latte/config.hpp"
#include "latte/data.hpp"
#include "latte/losses.hpp"
#include "latte/metrics.hpp"
#include "latte/model.hpp"

namespace latte {

// Vocabulary over training mention phrases plus every KB entity name.
inline Vocabulary build_training_vocab(const Dataset& ds,
                                       std::size_t min_count) {
    std::vector<std::vector<std::string>> corpus;
    for (const auto& e : ds.kb.entities) corpus.push_back(tokenize(e.name));
    for (const auto& m : ds.mentions)
        if (m.split == "train") corpus.push_back(m.phrase_tokens());
    return Vocabulary::build(corpus, min_count);
}

struct PreparedInstance {
    LinkingInstance instance;
    std::vector<std::string> mention_tokens;
    std::vector<std::vector<std::string>> candidate_tokens;  // pos first
    KnownTypeLabel mention_label;
    std::vector<KnownTypeLabel> candidate_labels;
};

inline PreparedInstance prepare_instance(const MentionRecord& mention,
                                         const KnowledgeBase& kb,
                                         const TfIdfIndex& index,
                                         const RunConfig& cfg) {
    PreparedInstance p;
    p.instance = generate_candidates(mention, kb, index, cfg.n_negatives);
    p.mention_tokens = mention.phrase_tokens();
    p.candidate_tokens.push_back(tokenize(p.instance.positive.name));
    for (const auto& neg : p.instance.negatives)
        p.candidate_tokens.push_back(tokenize(neg.name));
    p.mention_label =
        KnownTypeLabel::from_ids(mention.known_type_ids, cfg.known_count);
    p.candidate_labels.push_back(KnownTypeLabel::from_ids(
        p.instance.positive.known_type_ids, cfg.known_count));
    for (const auto& neg : p.instance.negatives)
        p.candidate_labels.push_back(
            KnownTypeLabel::from_ids(neg.known_type_ids, cfg.known_count));
    return p;
}

inline std::vector<PreparedInstance> prepare_split(
    const Dataset& ds, const std::string& split, const TfIdfIndex& index,
    const RunConfig& cfg) {
    std::vector<PreparedInstance> out;
    for (const auto& m : ds.mentions)
        if (m.split == split)
            out.push_back(prepare_instance(m, ds.kb, index, cfg));
    return out;
}

// Joint loss over one instance; returns the loss node plus the component
// values for logging.
inline JointLossBreakdown instance_loss(Graph& g, const Model& model,
                                        const PreparedInstance& inst,
                                        const RunConfig& cfg,
                                        EncodeCache* cache = nullptr) {
    EncodedSequence mention =
        encode_sequence(g, model, inst.mention_tokens, cfg, cache);
    std::vector<EncodedSequence> cands;
    std::vector<Tensor> type_scores;
    for (const auto& cand_tokens : inst.candidate_tokens) {
        cands.push_back(encode_sequence(g, model, cand_tokens, cfg, cache));
        type_scores.push_back(cands.back().known_scores);
    }
    std::vector<PairScore> scores =
        score_candidates(g, model, mention, cands, cfg);
    std::vector<Tensor> r_scores;
    for (const auto& ps : scores) r_scores.push_back(ps.r);
    std::vector<Tensor> r_negs(r_scores.begin() + 1, r_scores.end());
    return joint_loss(g, r_scores[0], r_negs, mention.known_scores,
                      inst.mention_label, type_scores, inst.candidate_labels,
                      cfg.loss_config());
}

// Scores all candidates of one instance with the tape off; ranking ties
// break by ascending entity id.
inline RankingResult rank_instance(const Model& model,
                                   const PreparedInstance& inst,
                                   const RunConfig& cfg) {
    Graph g;
    g.recording = false;
    EncodeCache cache;
    EncodedSequence mention =
        encode_sequence(g, model, inst.mention_tokens, cfg, &cache);
    std::vector<const CandidateEntity*> cands = {&inst.instance.positive};
    for (const auto& neg : inst.instance.negatives) cands.push_back(&neg);
    std::vector<EncodedSequence> encoded;
    for (std::size_t i = 0; i < cands.size(); ++i)
        encoded.push_back(
            encode_sequence(g, model, inst.candidate_tokens[i], cfg, &cache));
    std::vector<PairScore> scores =
        score_candidates(g, model, mention, encoded, cfg);
    std::vector<std::pair<std::string, double>> scored;
    for (std::size_t i = 0; i < cands.size(); ++i)
        scored.emplace_back(cands[i]->entity_id, scores[i].r->value[0]);
    return RankingResult::from_scores(inst.instance.mention.doc_id,
                                      scored,
                                      inst.instance.positive.entity_id);
}

struct EvalResult {
    double p1 = 0.0;
    double map = 0.0;
    std::vector<RankingResult> results;
};

inline EvalResult evaluate(const Model& model,
                           const std::vector<PreparedInstance>& instances,
                           const RunConfig& cfg) {
    if (instances.empty()) throw ValueError("evaluate: empty split");
    EvalResult out;
    for (const auto& inst : instances)
        out.results.push_back(rank_instance(model, inst, cfg));
    out.p1 = precision_at_1(out.results);
    out.map = mean_average_precision(out.results);
    return out;
}

// Oracle-style evaluation against an arbitrary scorer (test hook).
using ScoreFn = std::function<double(const MentionRecord&,
                                     const CandidateEntity&)>;

inline EvalResult evaluate_with(const std::vector<PreparedInstance>& instances,
                                const ScoreFn& score) {
    if (instances.empty()) throw ValueError("evaluate: empty split");
    EvalResult out;
    for (const auto& inst : instances) {
        std::vector<std::pair<std::string, double>> scored;
        scored.emplace_back(inst.instance.positive.entity_id,
                            score(inst.instance.mention,
                                  inst.instance.positive));
        for (const auto& neg : inst.instance.negatives)
            scored.emplace_back(neg.entity_id,
                                score(inst.instance.mention, neg));
        out.results.push_back(RankingResult::from_scores(
            inst.instance.mention.doc_id, scored,
            inst.instance.positive.entity_id));
    }
    out.p1 = precision_at_1(out.results);
    out.map = mean_average_precision(out.results);
    return out;
}

struct TrainResult {
    Checkpoint best;       // best-dev parameters
    std::vector<EpochMetrics> history;
    std::string log;       // deterministic per-epoch lines
    double best_dev_p1 = 0.0;
};

// Minibatch Adam over the joint loss; per-batch loss is the mean of
// per-instance losses. Dev metrics are logged each epoch; the best-dev
// checkpoint is retained; early stop after `patience` epochs without
// improvement. Fully deterministic given (seed, config, data).
inline TrainResult train(const Dataset& ds, const RunConfig& cfg,
                         const std::string& pretrained_path = "",
                         std::ostream* echo = nullptr) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    Vocabulary vocab = build_training_vocab(ds, cfg.min_count);
    Model model = Model::init(vocab, cfg, rng);
    std::ostringstream log;
    log << std::fixed;
    auto emit = [&](const std::string& line) {
        log << line << "\n";
        if (echo) *echo << line << "\n";
    };
    if (!pretrained_path.empty()) {
        const double oov = load_pretrained(pretrained_path, vocab,
                                           model.embedding);
        std::ostringstream os;
        os << "pretrained oov_rate " << std::fixed << std::setprecision(4)
           << oov;
        emit(os.str());
    }

    TfIdfIndex index(ds.kb);
    auto train_set = prepare_split(ds, "train", index, cfg);
    auto dev_set = prepare_split(ds, "dev", index, cfg);
    if (train_set.empty() && cfg.epochs > 0)
        throw ValueError("train: no training mentions in dataset");

    Adam opt(model.parameters(), cfg.learning_rate);

    TrainResult result;
    auto snapshot = [&](std::uint64_t epoch) {
        // deep-copy parameter storage so later updates don't leak in
        Checkpoint deep;
        deep.config = cfg;
        {
            std::mt19937_64 r2(cfg.seed);
            deep.model = Model::init(model.vocab, cfg, r2);
            auto src = model.parameters();
            auto dst = deep.model.parameters();
            for (std::size_t i = 0; i < src.size(); ++i)
                dst[i]->value = src[i]->value;
        }
        deep.epoch = epoch;
        deep.history = result.history;
        deep.has_optimizer = true;
        deep.adam_t = opt.step_count();
        deep.adam_m = opt.moment1();
        deep.adam_v = opt.moment2();
        return deep;
    };

    auto eval_dev = [&]() -> std::pair<double, double> {
        if (dev_set.empty()) return {0.0, 0.0};
        EvalResult ev = evaluate(model, dev_set, cfg);
        return {ev.p1, ev.map};
    };

    std::uint64_t best_epoch = 0;
    {
        auto [p1, map] = eval_dev();
        result.best_dev_p1 = p1;
        std::ostringstream os;
        os << std::fixed;
        os << "epoch 0 train_loss nan dev_p1 " << std::setprecision(4) << p1
           << " dev_map " << map;
        emit(os.str());
        EpochMetrics em;
        em.epoch = 0;
        em.train_loss = 0.0;
        em.dev_p1 = p1;
        em.dev_map = map;
        result.history.push_back(em);
        result.best = snapshot(0);
    }

    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (std::uint64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        for (std::size_t b = 0; b < order.size(); b += cfg.batch_size) {
            const std::size_t e = std::min(b + cfg.batch_size, order.size());
            Graph g;
            opt.zero_grad();
            EncodeCache cache;
            Tensor batch_total = make_scalar(0.0);
            for (std::size_t i = b; i < e; ++i) {
                auto breakdown =
                    instance_loss(g, model, train_set[order[i]], cfg, &cache);
                batch_total = add(g, batch_total, breakdown.total);
            }
            Tensor batch_loss =
                scale(g, batch_total, 1.0 / static_cast<double>(e - b));
            if (!std::isfinite(batch_loss->value[0]))
                throw NumericError("training diverged: non-finite loss");
            g.backward(batch_loss);
            model.embedding.mask_pad_grads();
            opt.step();
            epoch_loss += batch_loss->value[0];
            ++n_batches;
        }
        epoch_loss /= static_cast<double>(n_batches);

        auto [p1, map] = eval_dev();
        std::ostringstream os;
        os << std::fixed;
        os << "epoch " << epoch << " train_loss " << std::setprecision(6)
           << epoch_loss << " dev_p1 " << std::setprecision(4) << p1
           << " dev_map " << map;
        emit(os.str());
        EpochMetrics em;
        em.epoch = epoch;
        em.train_loss = epoch_loss;
        em.dev_p1 = p1;
        em.dev_map = map;
        result.history.push_back(em);

        if (p1 > result.best_dev_p1 || dev_set.empty()) {
            result.best_dev_p1 = p1;
            best_epoch = epoch;
            result.best = snapshot(epoch);
        } else if (epoch - best_epoch >= cfg.patience) {
            emit("early_stop epoch " + std::to_string(epoch));
            break;
        }
    }
    result.best.history = result.history;
    result.log = log.str();
    return result;
}

}  // namespace latte
