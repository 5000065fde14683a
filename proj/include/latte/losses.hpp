#pragma once

#include <cstddef>
#include <set>
#include <vector>

#include "latte/errors.hpp"
#include "latte/tensor.hpp"

namespace latte {

// Target distribution over K known types: uniform over the gold ids.
struct KnownTypeLabel {
    std::vector<double> target;  // length K, sums to 1

    static KnownTypeLabel from_ids(const std::set<std::size_t>& ids,
                                   std::size_t known_count) {
        if (ids.empty()) throw ValueError("known-type label: empty gold set");
        KnownTypeLabel l;
        l.target.assign(known_count, 0.0);
        for (std::size_t id : ids) {
            if (id >= known_count)
                throw IntegrityError("known-type id " + std::to_string(id) +
                                     " out of range K=" +
                                     std::to_string(known_count));
            l.target[id] = 1.0 / static_cast<double>(ids.size());
        }
        return l;
    }
};

struct JointLossConfig {
    double margin = 1.0;
    double type_weight = 1.0;  // lambda
    bool enable_latent = true;      // LT: g enters the fused score
    bool enable_known_type = true;  // KT: type loss term active
};

// Categorical cross-entropy against the known-type scores. The ReLU scores
// are pushed through a softmax first so the log is always defined.
inline Tensor type_loss(Graph& g, const KnownTypeLabel& label,
                        const Tensor& scores) {
    if (scores->size() != label.target.size())
        throw ShapeError("type_loss: score width " + shape_str(scores->shape) +
                         " vs K=" + std::to_string(label.target.size()));
    Tensor y_hat = softmax(g, scores);
    Tensor logp = log_op(g, y_hat);
    Tensor weighted =
        mul(g, logp, make_tensor(scores->shape, std::vector<double>(
                                                    label.target.begin(),
                                                    label.target.end())));
    return scale(g, sum(g, weighted), -1.0);
}

// Max-margin ranking loss summed over all negatives:
// sum_neg max(0, M - r_pos + r_neg)
inline Tensor ranking_loss(Graph& g, const Tensor& r_pos,
                           const std::vector<Tensor>& r_negs, double margin) {
    if (r_negs.empty())
        throw ValueError("ranking_loss: need at least one negative");
    if (margin <= 0.0) throw ConfigError("ranking_loss: margin must be > 0");
    Tensor total = make_scalar(0.0);
    for (const auto& r_neg : r_negs) {
        Tensor hinge =
            relu(g, add_scalar(g, sub(g, r_neg, r_pos), margin));
        total = add(g, total, hinge);
    }
    return total;
}

struct JointLossBreakdown {
    Tensor total;
    double rank_part = 0.0;
    double type_part = 0.0;  // already weighted by lambda
};

// L = L_rank + lambda * (L_type(mention) + mean over candidates L_type).
// With KT disabled the type term vanishes entirely.
inline JointLossBreakdown joint_loss(
    Graph& g, const Tensor& r_pos, const std::vector<Tensor>& r_negs,
    const Tensor& mention_type_scores, const KnownTypeLabel& mention_label,
    const std::vector<Tensor>& cand_type_scores,
    const std::vector<KnownTypeLabel>& cand_labels,
    const JointLossConfig& cfg) {
    JointLossBreakdown out;
    Tensor rank = ranking_loss(g, r_pos, r_negs, cfg.margin);
    out.rank_part = rank->value[0];
    out.total = rank;
    if (cfg.enable_known_type && cfg.type_weight > 0.0) {
        Tensor tloss = type_loss(g, mention_label, mention_type_scores);
        if (!cand_type_scores.empty()) {
            Tensor csum = make_scalar(0.0);
            for (std::size_t i = 0; i < cand_type_scores.size(); ++i)
                csum = add(g, csum,
                           type_loss(g, cand_labels[i], cand_type_scores[i]));
            tloss = add(g, tloss,
                        scale(g, csum,
                              1.0 / static_cast<double>(
                                        cand_type_scores.size())));
        }
        Tensor weighted = scale(g, tloss, cfg.type_weight);
        out.type_part = weighted->value[0];
        out.total = add(g, out.total, weighted);
    }
    return out;
}

}  // namespace latte
