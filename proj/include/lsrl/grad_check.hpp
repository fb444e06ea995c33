#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <vector>

#include "lsrl/layers.hpp"

namespace lsrl::nn {

// Central-difference gradient verification.
//
// compute_grads() must zero the gradient tensors, run forward+backward and
// leave analytic gradients in place; loss() must evaluate the scalar loss at
// the current parameter values without touching gradients. Checks every
// scalar in `params` (which may include the network input, wrapped as a
// ParamRef) and returns max |a - n| / max(|a|, |n|, 1e-8).
inline double max_rel_grad_error(std::span<const ParamRef> params,
                                 const std::function<double()>& loss,
                                 const std::function<void()>& compute_grads,
                                 double eps = 1e-5) {
    compute_grads();
    std::vector<std::vector<double>> analytic;
    analytic.reserve(params.size());
    for (const ParamRef& p : params) analytic.push_back(p.grad->data);

    double worst = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        Tensor& value = *params[j].value;
        for (std::size_t i = 0; i < value.numel(); ++i) {
            const double saved = value[i];
            value[i] = saved + eps;
            const double up = loss();
            value[i] = saved - eps;
            const double down = loss();
            value[i] = saved;
            const double numeric = (up - down) / (2.0 * eps);
            const double a = analytic[j][i];
            const double err = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-8});
            worst = std::max(worst, err);
        }
    }
    return worst;
}

}  // namespace lsrl::nn
