#pragma once

#include <array>
#include <random>
#include <vector>

#include "latte/errors.hpp"
#include "latte/tensor.hpp"

namespace latte {

// One direction of one layer. Gate order in the fused matrices is
// input, forget, output, cell-candidate.
struct LstmCellParams {
    Tensor w;  // [input_dim x 4h]
    Tensor u;  // [h x 4h]
    Tensor b;  // [1 x 4h], forget block initialized to 1.0
    std::size_t hidden = 0;
};

struct LstmParams {
    std::size_t layers = 0;
    std::size_t hidden = 0;
    // [layer][direction]; direction 0 runs left-to-right
    std::vector<std::array<LstmCellParams, 2>> cells;

    static LstmParams init(std::size_t input_dim, std::size_t hidden,
                           std::size_t layers, std::mt19937_64& rng) {
        LstmParams p;
        p.layers = layers;
        p.hidden = hidden;
        const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
        std::uniform_real_distribution<double> u(-bound, bound);
        for (std::size_t l = 0; l < layers; ++l) {
            const std::size_t in_dim = l == 0 ? input_dim : 2 * hidden;
            std::array<LstmCellParams, 2> pair;
            for (int dir = 0; dir < 2; ++dir) {
                auto rand_mat = [&](std::size_t r, std::size_t c) {
                    std::vector<double> v(r * c);
                    for (auto& x : v) x = u(rng);
                    return make_tensor({r, c}, std::move(v), true);
                };
                LstmCellParams cp;
                cp.hidden = hidden;
                cp.w = rand_mat(in_dim, 4 * hidden);
                cp.u = rand_mat(hidden, 4 * hidden);
                std::vector<double> bias(4 * hidden, 0.0);
                std::fill(bias.begin() + hidden, bias.begin() + 2 * hidden, 1.0);
                cp.b = make_tensor({1, 4 * hidden}, std::move(bias), true);
                pair[dir] = cp;
            }
            p.cells.push_back(pair);
        }
        return p;
    }

    std::vector<Tensor> parameters() const {
        std::vector<Tensor> out;
        for (const auto& layer : cells)
            for (const auto& cp : layer) {
                out.push_back(cp.w);
                out.push_back(cp.u);
                out.push_back(cp.b);
            }
        return out;
    }
};

// Standard LSTM recurrence: i,f,o = sigmoid, chat = tanh,
// c_t = f*c_prev + i*chat, h_t = o*tanh(c_t)
inline std::pair<Tensor, Tensor> lstm_cell(Graph& g, const Tensor& x,
                                           const Tensor& h_prev,
                                           const Tensor& c_prev,
                                           const LstmCellParams& p) {
    const std::size_t h = p.hidden;
    if (x->cols() != p.w->shape[0])
        throw ShapeError("lstm_cell: input width " + shape_str(x->shape) +
                         " vs weight " + shape_str(p.w->shape));
    Tensor gates = add(g, add(g, matmul(g, x, p.w), matmul(g, h_prev, p.u)),
                       p.b);
    Tensor gi = sigmoid(g, slice_cols(g, gates, 0, h));
    Tensor gf = sigmoid(g, slice_cols(g, gates, h, 2 * h));
    Tensor go = sigmoid(g, slice_cols(g, gates, 2 * h, 3 * h));
    Tensor gc = tanh_op(g, slice_cols(g, gates, 3 * h, 4 * h));
    Tensor c_t = add(g, mul(g, gf, c_prev), mul(g, gi, gc));
    Tensor h_t = mul(g, go, tanh_op(g, c_t));
    return {h_t, c_t};
}

// Multi-layer BiLSTM over a right-padded sequence. Forward direction runs
// left to right over the unmasked prefix, backward direction right to left;
// masked positions output zero rows at every layer.
inline Tensor bilstm_encode(Graph& g, const Tensor& embedded,
                            const std::vector<std::uint8_t>& mask,
                            const LstmParams& params) {
    const std::size_t L = embedded->shape[0];
    std::size_t len = 0;
    for (std::size_t t = 0; t < L; ++t)
        if (mask[t]) ++len;
    if (len == 0) throw ValueError("bilstm_encode: all-masked sequence");

    Tensor layer_in = embedded;
    const std::size_t h = params.hidden;
    for (std::size_t l = 0; l < params.layers; ++l) {
        std::vector<Tensor> fwd(L), bwd(L);
        for (int dir = 0; dir < 2; ++dir) {
            const auto& cp = params.cells[l][dir];
            Tensor hs = make_zeros({1, h});
            Tensor cs = make_zeros({1, h});
            for (std::size_t s = 0; s < len; ++s) {
                const std::size_t t = dir == 0 ? s : len - 1 - s;
                Tensor x = slice_rows(g, layer_in, t, t + 1);
                auto [hn, cn] = lstm_cell(g, x, hs, cs, cp);
                hs = hn;
                cs = cn;
                (dir == 0 ? fwd : bwd)[t] = hs;
            }
        }
        std::vector<Tensor> rows(L);
        for (std::size_t t = 0; t < L; ++t)
            rows[t] = t < len ? concat(g, {fwd[t], bwd[t]}, 1)
                              : make_zeros({1, 2 * h});
        layer_in = concat(g, rows, 0);
    }
    return layer_in;  // [L x 2h]
}

}  // namespace latte
