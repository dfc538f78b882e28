#include "playtrack/losses.hpp"

#include <cmath>

namespace playtrack {

double smooth_l1(const std::array<double, 4>& pred, const std::array<double, 4>& gt) {
    double total = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        const double e = std::abs(pred[i] - gt[i]);
        total += e < 1.0 ? 0.5 * e * e : e - 0.5;
    }
    return total;
}

LossResult total_loss(const BoundingBox& pred, const BoundingBox& gt, const LossWeights& weights) {
    const auto p = pred.as_array();
    const auto g = gt.as_array();
    LossResult out;
    out.loss = weights.l1 * smooth_l1(p, g);
    for (std::size_t i = 0; i < 4; ++i) {
        const double e = p[i] - g[i];
        const double d = std::abs(e) < 1.0 ? e : (e > 0.0 ? 1.0 : -1.0);
        out.grad[i] = weights.l1 * d;
    }
    if (weights.ciou != 0.0) {
        const auto ciou = ciou_loss_with_grad(pred, gt);
        out.loss += weights.ciou * ciou.loss;
        for (std::size_t i = 0; i < 4; ++i) out.grad[i] += weights.ciou * ciou.grad[i];
    }
    return out;
}

}  // namespace playtrack
