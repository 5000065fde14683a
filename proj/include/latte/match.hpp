#pragma once

#include <random>
#include <vector>

#include "latte/errors.hpp"
#include "latte/tensor.hpp"

namespace latte {

// Trilinear attention scorer plus the feed-forward relevance head.
struct AttentionParams {
    Tensor w_a;   // [3*2h x 1]
    Tensor ff_w1;  // [L*8h x hidden]
    Tensor ff_b1;  // [1 x hidden]
    Tensor ff_w2;  // [hidden x 1]
    Tensor ff_b2;  // [1 x 1]
    std::size_t enc_width = 0;  // 2h

    static AttentionParams init(std::size_t enc_width, std::size_t max_len,
                                std::size_t hidden, std::mt19937_64& rng) {
        AttentionParams p;
        p.enc_width = enc_width;
        auto rand_mat = [&](std::size_t r, std::size_t c) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(r));
            std::uniform_real_distribution<double> u(-bound, bound);
            std::vector<double> v(r * c);
            for (auto& x : v) x = u(rng);
            return make_tensor({r, c}, std::move(v), true);
        };
        p.w_a = rand_mat(3 * enc_width, 1);
        p.ff_w1 = rand_mat(max_len * 4 * enc_width, hidden);
        // small positive biases keep the ReLU head alive under the hinge
        // loss, which otherwise has an all-dead fixed point at f = 0
        p.ff_b1 = make_tensor({1, hidden},
                              std::vector<double>(hidden, 0.01), true);
        p.ff_w2 = rand_mat(hidden, 1);
        p.ff_b2 = make_tensor({1, 1}, {0.1}, true);
        return p;
    }

    std::vector<Tensor> parameters() const {
        return {w_a, ff_w1, ff_b1, ff_w2, ff_b2};
    }
};

// Latent projection shared between mention and candidate paths, and the
// known-type head on top of the pre-softmax latent encoding.
struct TypeParams {
    Tensor w_l;  // [L*2h x k]
    Tensor b_l;  // [1 x k]
    Tensor w_k;  // [k x K]
    Tensor b_k;  // [1 x K]
    std::size_t latent_count = 0;
    std::size_t known_count = 0;

    static TypeParams init(std::size_t enc_width, std::size_t max_len,
                           std::size_t latent_count, std::size_t known_count,
                           std::mt19937_64& rng) {
        TypeParams p;
        p.latent_count = latent_count;
        p.known_count = known_count;
        auto rand_mat = [&](std::size_t r, std::size_t c) {
            const double bound = 1.0 / std::sqrt(static_cast<double>(r));
            std::uniform_real_distribution<double> u(-bound, bound);
            std::vector<double> v(r * c);
            for (auto& x : v) x = u(rng);
            return make_tensor({r, c}, std::move(v), true);
        };
        p.w_l = rand_mat(max_len * enc_width, latent_count);
        p.b_l = make_zeros({1, latent_count}, true);
        p.w_k = rand_mat(latent_count, known_count);
        p.b_k = make_zeros({1, known_count}, true);
        return p;
    }

    std::vector<Tensor> parameters() const { return {w_l, b_l, w_k, b_k}; }
};

struct FusionParams {
    Tensor w_f;  // scalar weight on the attention score
    Tensor w_g;  // scalar weight on the latent-type similarity

    static FusionParams init() {
        FusionParams p;
        p.w_f = make_scalar(1.0, true);
        p.w_g = make_scalar(1.0, true);
        return p;
    }
    std::vector<Tensor> parameters() const { return {w_f, w_g}; }
};

// s_ij = w_a^T [u^c_i; u^p_j; u^c_i (*) u^p_j], computed as
// S = (U_c (*) w_m) U_p^T + (U_c w_c) 1^T + 1 (U_p w_p)^T
inline Tensor similarity_matrix(Graph& g, const Tensor& u_cand,
                                const Tensor& u_ment,
                                const AttentionParams& params) {
    const std::size_t w = params.enc_width;
    if (u_cand->shape[1] != w || u_ment->shape[1] != w)
        throw ShapeError("similarity_matrix: encoder width mismatch vs w_a");
    Tensor wc = slice_rows(g, params.w_a, 0, w);
    Tensor wp = slice_rows(g, params.w_a, w, 2 * w);
    Tensor wm = slice_rows(g, params.w_a, 2 * w, 3 * w);
    Tensor scaled = mul(g, u_cand, transpose(g, wm));  // row-broadcast
    Tensor s0 = matmul(g, scaled, transpose(g, u_ment));
    return add_outer(g, s0, matmul(g, u_cand, wc), matmul(g, u_ment, wp));
}

struct AttentionOutput {
    Tensor s_alpha;  // attention over candidate positions per mention pos
    Tensor s_beta;
    Tensor x;        // [L x 8h]
};

// Bidirectional cross-attention pooling. s_alpha normalizes each column of
// S over the candidate index; s_bar_beta normalizes each row over the
// mention index; s_beta = s_alpha * s_bar_beta^T as printed.
inline AttentionOutput bidirectional_attention(
    Graph& g, const Tensor& s, const Tensor& u_cand, const Tensor& u_ment,
    const std::vector<std::uint8_t>& cand_mask,
    const std::vector<std::uint8_t>& ment_mask) {
    const std::size_t L = s->shape[0];
    // column softmax over candidate axis, via transpose
    std::vector<std::uint8_t> colmask(L * L), rowmask(L * L);
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t j = 0; j < L; ++j) {
            colmask[j * L + i] = cand_mask[i];  // rows of S^T masked by cand
            rowmask[i * L + j] = ment_mask[j];
        }
    Tensor s_alpha =
        transpose(g, masked_softmax(g, transpose(g, s), colmask));
    Tensor s_bar_beta = masked_softmax(g, s, rowmask);
    Tensor s_beta = matmul(g, s_alpha, transpose(g, s_bar_beta));

    Tensor a_alpha = matmul(g, transpose(g, s_alpha), u_cand);  // [L x 2h]
    Tensor a_beta = matmul(g, transpose(g, s_beta), u_ment);
    Tensor x = concat(g,
                      {u_ment, a_alpha, mul(g, u_ment, a_alpha),
                       mul(g, u_cand, a_beta)},
                      1);
    // zero rows at padded mention positions
    std::vector<double> keep(x->size());
    const std::size_t width = x->shape[1];
    for (std::size_t j = 0; j < L; ++j)
        std::fill(keep.begin() + j * width, keep.begin() + (j + 1) * width,
                  ment_mask[j] ? 1.0 : 0.0);
    Tensor x_masked =
        mul(g, x, make_tensor({L, width}, std::move(keep)));
    return {s_alpha, s_beta, x_masked};
}

// f = ReLU(w2 * ReLU(w1 * flatten(X) + b1) + b2), scalar, never negative
inline Tensor attention_relevance(Graph& g, const Tensor& x,
                                  const AttentionParams& params) {
    Tensor flat = reshape(g, x, {1, x->size()});
    Tensor h = relu(g, add(g, matmul(g, flat, params.ff_w1), params.ff_b1));
    Tensor out = relu(g, add(g, matmul(g, h, params.ff_w2), params.ff_b2));
    return reshape(g, out, {1});
}

// Same head over many X matrices at once; one GEMM instead of one matvec
// per pair. Returns per-pair scalars.
inline std::vector<Tensor> attention_relevance_batch(
    Graph& g, const std::vector<Tensor>& xs, const AttentionParams& params) {
    std::vector<Tensor> flats;
    flats.reserve(xs.size());
    for (const auto& x : xs) flats.push_back(reshape(g, x, {1, x->size()}));
    Tensor stacked = concat(g, flats, 0);  // [n x L*8h]
    Tensor h = relu(g, add(g, matmul(g, stacked, params.ff_w1),
                           params.ff_b1));
    Tensor out = relu(g, add(g, matmul(g, h, params.ff_w2), params.ff_b2));
    std::vector<Tensor> scores;
    scores.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i)
        scores.push_back(reshape(g, slice_rows(g, out, i, i + 1), {1}));
    return scores;
}

struct LatentDistribution {
    Tensor v;      // [1 x k] pre-softmax encoding (feeds the known-type head)
    Tensor v_hat;  // [1 x k] distribution
};

inline LatentDistribution latent_type_distribution(Graph& g, const Tensor& u,
                                                   const TypeParams& params) {
    Tensor flat = reshape(g, u, {1, u->size()});
    Tensor v = add(g, matmul(g, flat, params.w_l), params.b_l);
    return {v, softmax(g, v)};
}

inline Tensor latent_type_similarity(Graph& g, const Tensor& v_hat_p,
                                     const Tensor& v_hat_c) {
    return cosine(g, v_hat_p, v_hat_c);
}

inline Tensor known_type_scores(Graph& g, const Tensor& v,
                                const TypeParams& params) {
    return relu(g, add(g, matmul(g, v, params.w_k), params.b_k));
}

inline Tensor rank_score(Graph& g, const Tensor& f, const Tensor& gscore,
                         const FusionParams& fusion) {
    return add(g, mul(g, fusion.w_f, f), mul(g, fusion.w_g, gscore));
}

}  // namespace latte
