#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "lsrl/layers.hpp"

namespace lsrl::nn {

class Sgd {
public:
    explicit Sgd(double lr) : lr_(lr) {
        if (lr <= 0.0) throw std::invalid_argument("Sgd: learning rate must be positive");
    }

    void step(std::span<const ParamRef> params) {
        for (const ParamRef& p : params) {
            if (p.value->numel() != p.grad->numel())
                throw std::invalid_argument("Sgd::step: value/grad shape mismatch");
            for (std::size_t i = 0; i < p.value->numel(); ++i)
                (*p.value)[i] -= lr_ * (*p.grad)[i];
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_;
};

// Adam with bias-corrected moments (beta1=0.9, beta2=0.999, eps=1e-8).
class Adam {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
        if (lr <= 0.0) throw std::invalid_argument("Adam: learning rate must be positive");
    }

    void step(std::span<const ParamRef> params) {
        if (m_.empty()) {
            for (const ParamRef& p : params) {
                m_.emplace_back(p.value->numel(), 0.0);
                v_.emplace_back(p.value->numel(), 0.0);
            }
        }
        if (m_.size() != params.size())
            throw std::invalid_argument("Adam::step: parameter set changed");
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (std::size_t j = 0; j < params.size(); ++j) {
            const ParamRef& p = params[j];
            if (p.value->numel() != p.grad->numel() || p.value->numel() != m_[j].size())
                throw std::invalid_argument("Adam::step: value/grad shape mismatch");
            for (std::size_t i = 0; i < p.value->numel(); ++i) {
                const double g = (*p.grad)[i];
                m_[j][i] = beta1_ * m_[j][i] + (1.0 - beta1_) * g;
                v_[j][i] = beta2_ * v_[j][i] + (1.0 - beta2_) * g * g;
                const double mhat = m_[j][i] / bc1;
                const double vhat = v_[j][i] / bc2;
                (*p.value)[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    double learning_rate() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

}  // namespace lsrl::nn
