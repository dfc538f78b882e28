#pragma once

#include <array>

#include "playtrack/geometry.hpp"

namespace playtrack {

struct LossWeights {
    double l1 = 50.0;
    double ciou = 1.0;
};

/// Sum over the four coordinates of 0.5 e^2 (|e| < 1) or |e| - 0.5.
double smooth_l1(const std::array<double, 4>& pred, const std::array<double, 4>& gt);

struct LossResult {
    double loss = 0.0;
    std::array<double, 4> grad{};  ///< d loss / d pred
};

/// weights.l1 * smooth_l1 + weights.ciou * ciou_loss, on normalized boxes.
LossResult total_loss(const BoundingBox& pred, const BoundingBox& gt, const LossWeights& weights);

}  // namespace playtrack
