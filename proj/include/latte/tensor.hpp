#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "latte/errors.hpp"

namespace latte {

// Dense row-major f64 tensor. Tensors are handles (shared_ptr) so graph nodes
// and parameter registries can alias the same storage.
struct TensorData {
    std::vector<std::size_t> shape;
    std::vector<double> value;
    std::vector<double> grad;  // sized lazily, matches value when present
    bool requires_grad = false;

    std::size_t size() const { return value.size(); }
    std::size_t rows() const { return shape.empty() ? 1 : shape[0]; }
    std::size_t cols() const {
        if (shape.size() < 2) return shape.empty() ? 1 : shape[0];
        return shape[1];
    }

    void ensure_grad() {
        if (grad.size() != value.size()) grad.assign(value.size(), 0.0);
    }
    void zero_grad() { grad.assign(value.size(), 0.0); }
};

using Tensor = std::shared_ptr<TensorData>;

using EMat = Eigen::Map<
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CEMat = Eigen::Map<
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

inline std::string shape_str(const std::vector<std::size_t>& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

inline std::size_t shape_numel(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t{1},
                           std::multiplies<>());
}

inline Tensor make_tensor(std::vector<std::size_t> shape,
                          std::vector<double> value,
                          bool requires_grad = false) {
    if (shape_numel(shape) != value.size())
        throw ShapeError("tensor data length " + std::to_string(value.size()) +
                         " does not match shape " + shape_str(shape));
    auto t = std::make_shared<TensorData>();
    t->shape = std::move(shape);
    t->value = std::move(value);
    t->requires_grad = requires_grad;
    return t;
}

inline Tensor make_zeros(std::vector<std::size_t> shape,
                         bool requires_grad = false) {
    std::vector<double> v(shape_numel(shape), 0.0);
    return make_tensor(std::move(shape), std::move(v), requires_grad);
}

inline Tensor make_scalar(double x, bool requires_grad = false) {
    return make_tensor({1}, {x}, requires_grad);
}

// Define-by-run tape. Ops execute eagerly; each op that touches a
// requires_grad input appends a backward closure. backward() walks the tape
// in reverse insertion order exactly once.
class Graph {
public:
    struct Node {
        std::function<void()> backward;
    };

    bool recording = true;  // false → pure inference, no tape

    void record(std::function<void()> fn) {
        if (recording) nodes_.push_back({std::move(fn)});
    }

    void backward(const Tensor& loss) {
        if (loss->size() != 1)
            throw ValueError("backward requires a scalar loss, got shape " +
                             shape_str(loss->shape));
        loss->ensure_grad();
        loss->grad[0] = 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
            it->backward();
    }

    std::size_t node_count() const { return nodes_.size(); }
    void clear() { nodes_.clear(); }

private:
    std::vector<Node> nodes_;
};

namespace detail {

inline void check_finite(const Tensor& t, const char* op) {
    for (double x : t->value)
        if (!std::isfinite(x))
            throw NumericError(std::string("non-finite value produced by op '") +
                               op + "'");
}

inline bool wants_grad(std::initializer_list<Tensor> inputs) {
    for (const auto& t : inputs)
        if (t->requires_grad) return true;
    return false;
}

inline Tensor make_out(std::vector<std::size_t> shape, bool requires_grad) {
    auto t = make_zeros(std::move(shape), requires_grad);
    // backward closures read out->grad unconditionally; nodes that end up
    // off the loss path must see zeros, not an empty buffer
    if (requires_grad) t->ensure_grad();
    return t;
}

}  // namespace detail

// ---- core ops ------------------------------------------------------------

inline Tensor matmul(Graph& g, const Tensor& a, const Tensor& b) {
    if (a->shape.size() != 2 || b->shape.size() != 2 ||
        a->shape[1] != b->shape[0])
        throw ShapeError("matmul shape mismatch: " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    const std::size_t p = a->shape[0], q = a->shape[1], r = b->shape[1];
    Tensor out = detail::make_out({p, r}, detail::wants_grad({a, b}));

    CEMat ma(a->value.data(), p, q);
    CEMat mb(b->value.data(), q, r);
    EMat mo(out->value.data(), p, r);
    mo.noalias() = ma * mb;
    detail::check_finite(out, "matmul");

    if (out->requires_grad)
        g.record([a, b, out, p, q, r]() {
            CEMat ma(a->value.data(), p, q);
            CEMat mb(b->value.data(), q, r);
            CEMat go(out->grad.data(), p, r);
            if (a->requires_grad) {
                a->ensure_grad();
                EMat ga(a->grad.data(), p, q);
                ga.noalias() += go * mb.transpose();
            }
            if (b->requires_grad) {
                b->ensure_grad();
                EMat gb(b->grad.data(), q, r);
                gb.noalias() += ma.transpose() * go;
            }
        });
    return out;
}

// add supports equal shapes, or b a row vector broadcast over a's rows
inline Tensor add(Graph& g, const Tensor& a, const Tensor& b) {
    const bool same = a->shape == b->shape;
    const bool row_bcast = !same && a->shape.size() == 2 &&
                           b->size() == a->shape[1];
    if (!same && !row_bcast)
        throw ShapeError("add shape mismatch: " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    Tensor out = detail::make_out(a->shape, detail::wants_grad({a, b}));
    const std::size_t n = a->size(), c = same ? n : b->size();
    for (std::size_t i = 0; i < n; ++i)
        out->value[i] = a->value[i] + b->value[same ? i : i % c];
    detail::check_finite(out, "add");

    if (out->requires_grad)
        g.record([a, b, out, same, n, c]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    b->grad[same ? i : i % c] += out->grad[i];
            }
        });
    return out;
}

inline Tensor sub(Graph& g, const Tensor& a, const Tensor& b) {
    if (a->shape != b->shape)
        throw ShapeError("sub shape mismatch: " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    Tensor out = detail::make_out(a->shape, detail::wants_grad({a, b}));
    for (std::size_t i = 0; i < a->size(); ++i)
        out->value[i] = a->value[i] - b->value[i];
    detail::check_finite(out, "sub");
    if (out->requires_grad)
        g.record([a, b, out]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < a->size(); ++i)
                    a->grad[i] += out->grad[i];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < b->size(); ++i)
                    b->grad[i] -= out->grad[i];
            }
        });
    return out;
}

// mul supports equal shapes, or b a row vector broadcast over a's rows
inline Tensor mul(Graph& g, const Tensor& a, const Tensor& b) {
    const bool same = a->shape == b->shape;
    const bool row_bcast = !same && a->shape.size() == 2 &&
                           b->size() == a->shape[1];
    if (!same && !row_bcast)
        throw ShapeError("mul shape mismatch: " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    Tensor out = detail::make_out(a->shape, detail::wants_grad({a, b}));
    const std::size_t n = a->size(), c = same ? n : b->size();
    for (std::size_t i = 0; i < n; ++i)
        out->value[i] = a->value[i] * b->value[same ? i : i % c];
    detail::check_finite(out, "mul");
    if (out->requires_grad)
        g.record([a, b, out, same, n, c]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    a->grad[i] += out->grad[i] * b->value[same ? i : i % c];
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    b->grad[same ? i : i % c] += out->grad[i] * a->value[i];
            }
        });
    return out;
}

// out[i][j] = a[i][j] + col[i] + row[j]
inline Tensor add_outer(Graph& g, const Tensor& a, const Tensor& col,
                        const Tensor& row) {
    if (a->shape.size() != 2 || col->size() != a->shape[0] ||
        row->size() != a->shape[1])
        throw ShapeError("add_outer shape mismatch: " + shape_str(a->shape) +
                         ", " + shape_str(col->shape) + ", " +
                         shape_str(row->shape));
    const std::size_t r = a->shape[0], c = a->shape[1];
    Tensor out = detail::make_out(a->shape, detail::wants_grad({a, col, row}));
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            out->value[i * c + j] =
                a->value[i * c + j] + col->value[i] + row->value[j];
    detail::check_finite(out, "add_outer");
    if (out->requires_grad)
        g.record([a, col, row, out, r, c]() {
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < r * c; ++i)
                    a->grad[i] += out->grad[i];
            }
            if (col->requires_grad) {
                col->ensure_grad();
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                        col->grad[i] += out->grad[i * c + j];
            }
            if (row->requires_grad) {
                row->ensure_grad();
                for (std::size_t i = 0; i < r; ++i)
                    for (std::size_t j = 0; j < c; ++j)
                        row->grad[j] += out->grad[i * c + j];
            }
        });
    return out;
}

inline Tensor scale(Graph& g, const Tensor& a, double c) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i) out->value[i] = a->value[i] * c;
    detail::check_finite(out, "scale");
    if (out->requires_grad)
        g.record([a, out, c]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[i] * c;
        });
    return out;
}

inline Tensor add_scalar(Graph& g, const Tensor& a, double c) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i) out->value[i] = a->value[i] + c;
    detail::check_finite(out, "add_scalar");
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[i];
        });
    return out;
}

// ReLU with subgradient 0 at exactly 0
inline Tensor relu(Graph& g, const Tensor& a) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i)
        out->value[i] = a->value[i] > 0.0 ? a->value[i] : 0.0;
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                if (a->value[i] > 0.0) a->grad[i] += out->grad[i];
        });
    return out;
}

inline Tensor sigmoid(Graph& g, const Tensor& a) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i)
        out->value[i] = 1.0 / (1.0 + std::exp(-a->value[i]));
    detail::check_finite(out, "sigmoid");
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const double y = out->value[i];
                a->grad[i] += out->grad[i] * y * (1.0 - y);
            }
        });
    return out;
}

inline Tensor tanh_op(Graph& g, const Tensor& a) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i)
        out->value[i] = std::tanh(a->value[i]);
    detail::check_finite(out, "tanh");
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i) {
                const double y = out->value[i];
                a->grad[i] += out->grad[i] * (1.0 - y * y);
            }
        });
    return out;
}

inline Tensor log_op(Graph& g, const Tensor& a) {
    Tensor out = detail::make_out(a->shape, a->requires_grad);
    for (std::size_t i = 0; i < a->size(); ++i) {
        if (a->value[i] <= 0.0)
            throw ValueError("log of non-positive value");
        out->value[i] = std::log(a->value[i]);
    }
    detail::check_finite(out, "log");
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[i] / a->value[i];
        });
    return out;
}

inline Tensor sum(Graph& g, const Tensor& a) {
    Tensor out = detail::make_out({1}, a->requires_grad);
    out->value[0] =
        std::accumulate(a->value.begin(), a->value.end(), 0.0);
    detail::check_finite(out, "sum");
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[0];
        });
    return out;
}

inline Tensor mean(Graph& g, const Tensor& a) {
    return scale(g, sum(g, a), 1.0 / static_cast<double>(a->size()));
}

// 2-D concatenation along axis 0 (stack rows) or axis 1 (widen rows)
inline Tensor concat(Graph& g, const std::vector<Tensor>& parts, int axis) {
    if (parts.empty()) throw ValueError("concat of zero tensors");
    if (axis != 0 && axis != 1) throw ShapeError("concat axis must be 0 or 1");
    // 1-D tensors are treated as single rows for axis 1 and columns stacks
    // for axis 0 of 1-D inputs
    bool all_1d = true;
    for (const auto& p : parts) all_1d = all_1d && p->shape.size() == 1;
    if (all_1d && axis == 0) {
        std::size_t total = 0;
        bool rg = false;
        for (const auto& p : parts) { total += p->size(); rg = rg || p->requires_grad; }
        Tensor out = detail::make_out({total}, rg);
        std::size_t off = 0;
        for (const auto& p : parts) {
            std::copy(p->value.begin(), p->value.end(), out->value.begin() + off);
            off += p->size();
        }
        if (out->requires_grad)
            g.record([parts, out]() {
                std::size_t off = 0;
                for (const auto& p : parts) {
                    if (p->requires_grad) {
                        p->ensure_grad();
                        for (std::size_t i = 0; i < p->size(); ++i)
                            p->grad[i] += out->grad[off + i];
                    }
                    off += p->size();
                }
            });
        return out;
    }

    auto dims = [](const Tensor& t) -> std::pair<std::size_t, std::size_t> {
        if (t->shape.size() == 1) return {1, t->shape[0]};
        return {t->shape[0], t->shape[1]};
    };
    auto [r0, c0] = dims(parts[0]);
    std::size_t rows = r0, cols = c0;
    bool rg = parts[0]->requires_grad;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        auto [r, c] = dims(parts[i]);
        rg = rg || parts[i]->requires_grad;
        if (axis == 0) {
            if (c != cols)
                throw ShapeError("concat axis 0: column mismatch " +
                                 shape_str(parts[i]->shape));
            rows += r;
        } else {
            if (r != rows)
                throw ShapeError("concat axis 1: row mismatch " +
                                 shape_str(parts[i]->shape));
            cols += c;
        }
    }
    Tensor out = detail::make_out({rows, cols}, rg);
    if (axis == 0) {
        std::size_t off = 0;
        for (const auto& p : parts) {
            std::copy(p->value.begin(), p->value.end(), out->value.begin() + off);
            off += p->size();
        }
    } else {
        std::size_t coff = 0;
        for (const auto& p : parts) {
            auto [r, c] = dims(p);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j)
                    out->value[i * cols + coff + j] = p->value[i * c + j];
            coff += c;
        }
    }
    if (out->requires_grad)
        g.record([parts, out, axis, cols, dims]() {
            if (axis == 0) {
                std::size_t off = 0;
                for (const auto& p : parts) {
                    if (p->requires_grad) {
                        p->ensure_grad();
                        for (std::size_t i = 0; i < p->size(); ++i)
                            p->grad[i] += out->grad[off + i];
                    }
                    off += p->size();
                }
            } else {
                std::size_t coff = 0;
                for (const auto& p : parts) {
                    auto [r, c] = dims(p);
                    if (p->requires_grad) {
                        p->ensure_grad();
                        for (std::size_t i = 0; i < r; ++i)
                            for (std::size_t j = 0; j < c; ++j)
                                p->grad[i * c + j] +=
                                    out->grad[i * cols + coff + j];
                    }
                    coff += c;
                }
            }
        });
    return out;
}

inline Tensor slice_cols(Graph& g, const Tensor& a, std::size_t begin,
                         std::size_t end) {
    if (a->shape.size() != 2 || end > a->shape[1] || begin >= end)
        throw ShapeError("slice_cols out of range on " + shape_str(a->shape));
    const std::size_t rows = a->shape[0], cols = a->shape[1], w = end - begin;
    Tensor out = detail::make_out({rows, w}, a->requires_grad);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < w; ++j)
            out->value[i * w + j] = a->value[i * cols + begin + j];
    if (out->requires_grad)
        g.record([a, out, rows, cols, w, begin]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < rows; ++i)
                for (std::size_t j = 0; j < w; ++j)
                    a->grad[i * cols + begin + j] += out->grad[i * w + j];
        });
    return out;
}

inline Tensor slice_rows(Graph& g, const Tensor& a, std::size_t begin,
                         std::size_t end) {
    if (a->shape.size() != 2 || end > a->shape[0] || begin >= end)
        throw ShapeError("slice_rows out of range on " + shape_str(a->shape));
    const std::size_t cols = a->shape[1], h = end - begin;
    Tensor out = detail::make_out({h, cols}, a->requires_grad);
    std::copy(a->value.begin() + begin * cols, a->value.begin() + end * cols,
              out->value.begin());
    if (out->requires_grad)
        g.record([a, out, cols, h, begin]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < h * cols; ++i)
                a->grad[begin * cols + i] += out->grad[i];
        });
    return out;
}

inline Tensor transpose(Graph& g, const Tensor& a) {
    if (a->shape.size() != 2)
        throw ShapeError("transpose requires a matrix, got " +
                         shape_str(a->shape));
    const std::size_t r = a->shape[0], c = a->shape[1];
    Tensor out = detail::make_out({c, r}, a->requires_grad);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j)
            out->value[j * r + i] = a->value[i * c + j];
    if (out->requires_grad)
        g.record([a, out, r, c]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j)
                    a->grad[i * c + j] += out->grad[j * r + i];
        });
    return out;
}

inline Tensor reshape(Graph& g, const Tensor& a,
                      std::vector<std::size_t> shape) {
    if (shape_numel(shape) != a->size())
        throw ShapeError("reshape " + shape_str(a->shape) + " -> " +
                         shape_str(shape) + " changes element count");
    Tensor out = detail::make_out(shape, a->requires_grad);
    out->value = a->value;
    if (out->requires_grad)
        g.record([a, out]() {
            a->ensure_grad();
            for (std::size_t i = 0; i < a->size(); ++i)
                a->grad[i] += out->grad[i];
        });
    return out;
}

// Row-wise softmax over the last axis with a boolean keep-mask. Masked
// entries are exactly 0 in the output; the -inf substitution happens only
// inside the kernel so stored tensors stay finite.
inline Tensor masked_softmax(Graph& g, const Tensor& x,
                             const std::vector<std::uint8_t>& mask) {
    if (mask.size() != x->size())
        throw ShapeError("masked_softmax mask length mismatch");
    const std::size_t cols = x->shape.back();
    const std::size_t rows = x->size() / cols;
    Tensor out = detail::make_out(x->shape, x->requires_grad);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* xv = x->value.data() + i * cols;
        const std::uint8_t* m = mask.data() + i * cols;
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < cols; ++j)
            if (m[j] && xv[j] > mx) mx = xv[j];
        if (!std::isfinite(mx))
            throw ValueError("masked_softmax: fully masked row " +
                             std::to_string(i));
        double z = 0.0;
        double* ov = out->value.data() + i * cols;
        for (std::size_t j = 0; j < cols; ++j) {
            ov[j] = m[j] ? std::exp(xv[j] - mx) : 0.0;
            z += ov[j];
        }
        for (std::size_t j = 0; j < cols; ++j) ov[j] /= z;
    }
    detail::check_finite(out, "masked_softmax");
    if (out->requires_grad)
        g.record([x, out, mask, rows, cols]() {
            x->ensure_grad();
            for (std::size_t i = 0; i < rows; ++i) {
                const double* y = out->value.data() + i * cols;
                const double* gy = out->grad.data() + i * cols;
                const std::uint8_t* m = mask.data() + i * cols;
                double dot = 0.0;
                for (std::size_t j = 0; j < cols; ++j)
                    if (m[j]) dot += gy[j] * y[j];
                double* gx = x->grad.data() + i * cols;
                for (std::size_t j = 0; j < cols; ++j)
                    if (m[j]) gx[j] += y[j] * (gy[j] - dot);
            }
        });
    return out;
}

inline Tensor softmax(Graph& g, const Tensor& x) {
    return masked_softmax(g, x, std::vector<std::uint8_t>(x->size(), 1));
}

// Cosine similarity of two equal-length vectors, scalar output
inline Tensor cosine(Graph& g, const Tensor& a, const Tensor& b) {
    if (a->size() != b->size())
        throw ShapeError("cosine length mismatch: " + shape_str(a->shape) +
                         " vs " + shape_str(b->shape));
    const std::size_t n = a->size();
    double dot = 0.0, na2 = 0.0, nb2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dot += a->value[i] * b->value[i];
        na2 += a->value[i] * a->value[i];
        nb2 += b->value[i] * b->value[i];
    }
    if (na2 == 0.0 || nb2 == 0.0)
        throw ValueError("cosine of zero-norm vector");
    const double na = std::sqrt(na2), nb = std::sqrt(nb2);
    double c = dot / (na * nb);
    c = std::clamp(c, -1.0, 1.0);
    Tensor out = detail::make_out({1}, detail::wants_grad({a, b}));
    out->value[0] = c;
    if (out->requires_grad)
        g.record([a, b, out, n, dot, na, nb, c]() {
            const double go = out->grad[0];
            if (a->requires_grad) {
                a->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    a->grad[i] += go * (b->value[i] / (na * nb) -
                                        c * a->value[i] / (na * na));
            }
            if (b->requires_grad) {
                b->ensure_grad();
                for (std::size_t i = 0; i < n; ++i)
                    b->grad[i] += go * (a->value[i] / (na * nb) -
                                        c * b->value[i] / (nb * nb));
            }
        });
    return out;
}

// Embedding lookup: gathers rows of `table` by id; gradient scatter-adds
inline Tensor rows_lookup(Graph& g, const Tensor& table,
                          const std::vector<std::size_t>& ids) {
    if (table->shape.size() != 2)
        throw ShapeError("rows_lookup requires a matrix table");
    const std::size_t d = table->shape[1];
    for (std::size_t id : ids)
        if (id >= table->shape[0])
            throw ShapeError("rows_lookup id " + std::to_string(id) +
                             " out of range for " + shape_str(table->shape));
    Tensor out = detail::make_out({ids.size(), d}, table->requires_grad);
    for (std::size_t i = 0; i < ids.size(); ++i)
        std::copy(table->value.begin() + ids[i] * d,
                  table->value.begin() + (ids[i] + 1) * d,
                  out->value.begin() + i * d);
    if (out->requires_grad)
        g.record([table, out, ids, d]() {
            table->ensure_grad();
            for (std::size_t i = 0; i < ids.size(); ++i)
                for (std::size_t j = 0; j < d; ++j)
                    table->grad[ids[i] * d + j] += out->grad[i * d + j];
        });
    return out;
}

// im2col for 1-D convolution: x is [P x d]; output row t is the flattened
// window x[t .. t+k-1], giving [(P-k+1) x k*d]
inline Tensor windows(Graph& g, const Tensor& x, std::size_t k) {
    if (x->shape.size() != 2 || x->shape[0] < k || k == 0)
        throw ShapeError("windows: need at least k=" + std::to_string(k) +
                         " rows, got " + shape_str(x->shape));
    const std::size_t p = x->shape[0], d = x->shape[1], w = p - k + 1;
    Tensor out = detail::make_out({w, k * d}, x->requires_grad);
    for (std::size_t t = 0; t < w; ++t)
        std::copy(x->value.begin() + t * d, x->value.begin() + (t + k) * d,
                  out->value.begin() + t * k * d);
    if (out->requires_grad)
        g.record([x, out, w, k, d]() {
            x->ensure_grad();
            for (std::size_t t = 0; t < w; ++t)
                for (std::size_t j = 0; j < k * d; ++j)
                    x->grad[t * d + j] += out->grad[t * k * d + j];
        });
    return out;
}

// Per-column max over the first `valid_rows` rows; gradient flows to the
// first attaining row (deterministic tie rule)
inline Tensor col_max(Graph& g, const Tensor& x, std::size_t valid_rows) {
    if (x->shape.size() != 2 || valid_rows == 0 || valid_rows > x->shape[0])
        throw ShapeError("col_max: invalid row count for " +
                         shape_str(x->shape));
    const std::size_t cols = x->shape[1];
    Tensor out = detail::make_out({1, cols}, x->requires_grad);
    std::vector<std::size_t> arg(cols, 0);
    for (std::size_t j = 0; j < cols; ++j) {
        double best = x->value[j];
        for (std::size_t i = 1; i < valid_rows; ++i)
            if (x->value[i * cols + j] > best) {
                best = x->value[i * cols + j];
                arg[j] = i;
            }
        out->value[j] = best;
    }
    if (out->requires_grad)
        g.record([x, out, arg, cols]() {
            x->ensure_grad();
            for (std::size_t j = 0; j < cols; ++j)
                x->grad[arg[j] * cols + j] += out->grad[j];
        });
    return out;
}

}  // namespace latte
