#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "latte/errors.hpp"
#include "latte/tensor.hpp"

namespace latte {

// Adam with bias correction. One optimizer instance owns the moment state
// for a fixed list of parameter tensors; the step count is shared.
class Adam {
public:
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    Adam() = default;
    Adam(std::vector<Tensor> params, double lr_) : lr(lr_) {
        reset(std::move(params));
    }

    void reset(std::vector<Tensor> params) {
        params_ = std::move(params);
        m_.clear();
        v_.clear();
        for (const auto& p : params_) {
            m_.emplace_back(p->size(), 0.0);
            v_.emplace_back(p->size(), 0.0);
        }
        t_ = 0;
    }

    void zero_grad() {
        for (auto& p : params_) p->zero_grad();
    }

    void step() {
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto& p = *params_[k];
            if (p.grad.size() != p.value.size())
                throw ShapeError("adam_step: grad/param length mismatch for " +
                                 shape_str(p.shape));
            for (std::size_t i = 0; i < p.value.size(); ++i) {
                const double gi = p.grad[i];
                m_[k][i] = beta1 * m_[k][i] + (1.0 - beta1) * gi;
                v_[k][i] = beta2 * v_[k][i] + (1.0 - beta2) * gi * gi;
                const double mhat = m_[k][i] / bc1;
                const double vhat = v_[k][i] / bc2;
                p.value[i] -= lr * mhat / (std::sqrt(vhat) + eps);
            }
        }
    }

    const std::vector<Tensor>& params() const { return params_; }
    std::uint64_t step_count() const { return t_; }

    // checkpoint access
    std::vector<std::vector<double>>& moment1() { return m_; }
    std::vector<std::vector<double>>& moment2() { return v_; }
    void set_step_count(std::uint64_t t) { t_ = t; }

private:
    std::vector<Tensor> params_;
    std::vector<std::vector<double>> m_, v_;
    std::uint64_t t_ = 0;
};

}  // namespace latte
