#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>

#include "lsrl/layers.hpp"
#include "lsrl/semantics.hpp"
#include "lsrl/tensor.hpp"

namespace lsrl::nn {

struct CeLossResult {
    double loss;
    Tensor dlogits;
};

// Weighted categorical cross-entropy over pixels, averaged across the batch:
// loss = -(1/(B*H*W)) * sum_pixels w_true * log(p_true), p = softmax_channels.
// logits: [B, 13, H, W]; targets: per-pixel class ids, row-major per image.
inline CeLossResult weighted_ce_loss_batch(const Tensor& logits,
                                           std::span<const std::uint8_t> target_ids,
                                           const ClassWeights& weights) {
    if (logits.ndim() != 4 || logits.dim(1) != static_cast<std::size_t>(kNumClasses))
        throw std::invalid_argument("weighted_ce_loss: expected logits [B,13,H,W]");
    const std::size_t batch = logits.dim(0);
    const std::size_t plane = logits.dim(2) * logits.dim(3);
    if (target_ids.size() != batch * plane)
        throw std::invalid_argument("weighted_ce_loss: target size mismatch");

    Tensor probs = softmax_channels(logits);
    const double inv_n = 1.0 / static_cast<double>(batch * plane);
    double loss = 0.0;
    Tensor dlogits = probs;  // starts as p, becomes w_t * (p - t) / (B*H*W)
    for (std::size_t b = 0; b < batch; ++b) {
        double* dbase = dlogits.data.data() + b * kNumClasses * plane;
        const double* pbase = probs.data.data() + b * kNumClasses * plane;
        for (std::size_t p = 0; p < plane; ++p) {
            const std::uint8_t t = target_ids[b * plane + p];
            if (t >= kNumClasses)
                throw std::invalid_argument("weighted_ce_loss: invalid target class");
            const double wt = weights.w[t];
            loss -= wt * std::log(std::max(pbase[t * plane + p], 1e-300));
            for (int c = 0; c < kNumClasses; ++c) dbase[c * plane + p] *= wt * inv_n;
            dbase[t * plane + p] -= wt * inv_n;
        }
    }
    return {loss * inv_n, std::move(dlogits)};
}

// Single-image form: logits [13, H, W] against a one-hot target volume.
inline CeLossResult weighted_ce_loss(const Tensor& logits, const OneHotVolume& target,
                                     const ClassWeights& weights) {
    if (logits.ndim() != 3 || logits.dim(0) != static_cast<std::size_t>(kNumClasses))
        throw std::invalid_argument("weighted_ce_loss: expected logits [13,H,W]");
    if (logits.dim(1) != static_cast<std::size_t>(target.height) ||
        logits.dim(2) != static_cast<std::size_t>(target.width))
        throw std::invalid_argument("weighted_ce_loss: logits/target shape mismatch");
    SemanticGrid ids = argmax_channels(target.channels);
    Tensor batched = logits.reshaped({1, static_cast<std::size_t>(kNumClasses),
                                      logits.dim(1), logits.dim(2)});
    CeLossResult r = weighted_ce_loss_batch(batched, ids.cells, weights);
    r.dlogits = r.dlogits.reshaped({static_cast<std::size_t>(kNumClasses), logits.dim(1),
                                    logits.dim(2)});
    return r;
}

struct TdLossResult {
    double loss;
    double dpredicted;
};

// loss = 1/2 (target - predicted)^2; the target is a constant, so the
// gradient flows only to the prediction.
inline TdLossResult td_loss(double predicted, double target) {
    const double err = predicted - target;
    return {0.5 * err * err, err};
}

}  // namespace lsrl::nn
