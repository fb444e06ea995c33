#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "lsrl/tensor.hpp"

namespace lsrl {

inline constexpr int kNumClasses = 13;

// Fixed label catalog; ids are a bijection onto 0..12.
enum class SemClass : std::uint8_t {
    kRoad = 0,
    kRoadLine = 1,
    kSidewalk = 2,
    kTerrain = 3,
    kFenceBarrier = 4,
    kBuilding = 5,
    kVegetation = 6,
    kVehicle = 7,
    kPedestrian = 8,
    kPole = 9,
    kWall = 10,
    kTrafficSign = 11,
    kNone = 12,
};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "road",     "road-line",  "sidewalk", "terrain", "fence-barrier",
    "building", "vegetation", "vehicle",  "pedestrian", "pole",
    "wall",     "traffic-sign", "none",
};

// H x W grid of class ids.
struct SemanticGrid {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> cells;  // row-major

    SemanticGrid() = default;
    SemanticGrid(int h, int w) : height(h), width(w), cells(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int r, int c) { return cells[static_cast<std::size_t>(r) * width + c]; }
    std::uint8_t at(int r, int c) const { return cells[static_cast<std::size_t>(r) * width + c]; }
    std::size_t num_pixels() const { return cells.size(); }

    bool valid() const {
        if (height <= 0 || width <= 0) return false;
        if (cells.size() != static_cast<std::size_t>(height) * width) return false;
        for (std::uint8_t c : cells)
            if (c >= kNumClasses) return false;
        return true;
    }
};

using ClassCounts = std::array<std::uint64_t, kNumClasses>;

// Normalized inverse-frequency loss weights.
struct ClassWeights {
    std::array<double, kNumClasses> w{};
};

inline ClassCounts class_frequencies(std::span<const SemanticGrid> dataset) {
    if (dataset.empty())
        throw std::invalid_argument("class_frequencies: empty dataset");
    ClassCounts counts{};
    for (const SemanticGrid& g : dataset)
        for (std::uint8_t c : g.cells) {
            if (c >= kNumClasses)
                throw std::invalid_argument("class_frequencies: invalid class id");
            ++counts[c];
        }
    return counts;
}

// w_j = (1/f_j) / sum_k (1/f_k) over observed classes; unobserved classes get 0.
inline ClassWeights compute_class_weights(const ClassCounts& counts) {
    double inv_sum = 0.0;
    for (std::uint64_t f : counts)
        if (f > 0) inv_sum += 1.0 / static_cast<double>(f);
    if (inv_sum == 0.0)
        throw std::invalid_argument("compute_class_weights: all counts are zero");
    ClassWeights weights;
    for (int j = 0; j < kNumClasses; ++j)
        weights.w[j] = counts[j] > 0 ? (1.0 / static_cast<double>(counts[j])) / inv_sum : 0.0;
    return weights;
}

// 13-channel one-hot volume, layout [13, H, W].
struct OneHotVolume {
    int height = 0;
    int width = 0;
    Tensor channels;  // [13, H, W]
};

inline OneHotVolume one_hot(const SemanticGrid& grid) {
    if (!grid.valid()) throw std::invalid_argument("one_hot: invalid grid");
    OneHotVolume v;
    v.height = grid.height;
    v.width = grid.width;
    v.channels = Tensor{static_cast<std::size_t>(kNumClasses),
                        static_cast<std::size_t>(grid.height),
                        static_cast<std::size_t>(grid.width)};
    const std::size_t plane = grid.num_pixels();
    for (std::size_t p = 0; p < plane; ++p)
        v.channels[grid.cells[p] * plane + p] = 1.0;
    return v;
}

// Per-pixel argmax over the channel axis of a [13, H, W] volume.
inline SemanticGrid argmax_channels(const Tensor& channels) {
    if (channels.ndim() != 3 || channels.dim(0) != kNumClasses)
        throw std::invalid_argument("argmax_channels: expected [13, H, W]");
    const int h = static_cast<int>(channels.dim(1));
    const int w = static_cast<int>(channels.dim(2));
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    SemanticGrid g(h, w);
    for (std::size_t p = 0; p < plane; ++p) {
        int best = 0;
        double best_v = channels[p];
        for (int c = 1; c < kNumClasses; ++c) {
            double v = channels[c * plane + p];
            if (v > best_v) {
                best_v = v;
                best = c;
            }
        }
        g.cells[p] = static_cast<std::uint8_t>(best);
    }
    return g;
}

}  // namespace lsrl
