#include "playtrack/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace playtrack {

SimilarityMetric parse_metric(std::string_view name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::erase(lower, '_');
    std::erase(lower, '-');
    if (lower == "iou") return SimilarityMetric::kIoU;
    if (lower == "eiou") return SimilarityMetric::kEIoU;
    if (lower == "hiou" || lower == "haiou") return SimilarityMetric::kHIoU;
    if (lower == "haeiou") return SimilarityMetric::kHAEIoU;
    throw std::invalid_argument("unknown similarity metric '" + std::string(name) +
                                "' (expected iou, eiou, hiou, ha-eiou)");
}

std::string to_string(SimilarityMetric metric) {
    switch (metric) {
        case SimilarityMetric::kIoU: return "iou";
        case SimilarityMetric::kEIoU: return "eiou";
        case SimilarityMetric::kHIoU: return "hiou";
        case SimilarityMetric::kHAEIoU: return "ha-eiou";
    }
    return "unknown";
}

double iou(const BoundingBox& a, const BoundingBox& b) {
    const double area_a = a.area();
    const double area_b = b.area();
    if (area_a <= 0.0 || area_b <= 0.0) return 0.0;
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (area_a + area_b - inter);
}

BoundingBox expand(const BoundingBox& b, double buffer) {
    if (!(buffer >= 0.0 && buffer <= 1.0)) {
        throw std::invalid_argument("buffer must lie in [0, 1]");
    }
    return {b.x - 0.5 * buffer * b.w, b.y - 0.5 * buffer * b.h, b.w + buffer * b.w,
            b.h + buffer * b.h};
}

double eiou(const BoundingBox& a, const BoundingBox& b, double buffer) {
    if (buffer == 0.0) return iou(a, b);
    return iou(expand(a, buffer), expand(b, buffer));
}

double hiou(const BoundingBox& a, const BoundingBox& b, bool abs_numerator) {
    const double span = std::max(a.y2(), b.y2()) - std::min(a.y, b.y);
    if (span <= 0.0) return 1.0;
    double overlap = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    overlap = abs_numerator ? std::abs(overlap) : std::max(overlap, 0.0);
    return std::min(overlap / span, 1.0);
}

double ha_eiou(const BoundingBox& a, const BoundingBox& b, double buffer,
               const GeometryOptions& opts) {
    const double height = opts.hiou_on_expanded
                              ? hiou(expand(a, buffer), expand(b, buffer), opts.hiou_abs)
                              : hiou(a, b, opts.hiou_abs);
    return height * eiou(a, b, buffer);
}

double similarity(SimilarityMetric metric, const BoundingBox& a, const BoundingBox& b,
                  double buffer, const GeometryOptions& opts) {
    switch (metric) {
        case SimilarityMetric::kIoU: return iou(a, b);
        case SimilarityMetric::kEIoU: return eiou(a, b, buffer);
        case SimilarityMetric::kHIoU: return hiou(a, b, opts.hiou_abs) * iou(a, b);
        case SimilarityMetric::kHAEIoU: return ha_eiou(a, b, buffer, opts);
    }
    return 0.0;
}

double ciou_loss(const BoundingBox& pred, const BoundingBox& gt) {
    return ciou_loss_with_grad(pred, gt).loss;
}

namespace {

// d/dw and d/dh of atan2(w, h); zero at the origin where atan2 is pinned to 0.
std::array<double, 2> atan_ratio_grad(double w, double h) {
    const double r2 = w * w + h * h;
    if (r2 <= 0.0) return {0.0, 0.0};
    return {h / r2, -w / r2};
}

}  // namespace

CiouResult ciou_loss_with_grad(const BoundingBox& p, const BoundingBox& g) {
    using Grad = std::array<double, 4>;  // d/d(x, y, w, h) of pred
    CiouResult out;

    // Intersection.
    const double ix1 = std::max(p.x, g.x), ix2 = std::min(p.x2(), g.x2());
    const double iy1 = std::max(p.y, g.y), iy2 = std::min(p.y2(), g.y2());
    const double iw = std::max(ix2 - ix1, 0.0);
    const double ih = std::max(iy2 - iy1, 0.0);
    Grad d_iw{}, d_ih{};
    if (ix2 - ix1 > 0.0) {
        const double right = p.x2() < g.x2() ? 1.0 : 0.0;
        const double left = p.x > g.x ? 1.0 : 0.0;
        d_iw = {right - left, 0.0, right, 0.0};
    }
    if (iy2 - iy1 > 0.0) {
        const double bottom = p.y2() < g.y2() ? 1.0 : 0.0;
        const double top = p.y > g.y ? 1.0 : 0.0;
        d_ih = {0.0, bottom - top, 0.0, bottom};
    }
    const double inter = iw * ih;
    const double uni = p.area() + g.area() - inter;
    const double iou_v = uni > 0.0 ? inter / uni : 0.0;
    Grad d_iou{};
    if (uni > 0.0) {
        const Grad d_area{0.0, 0.0, p.h, p.w};
        for (int k = 0; k < 4; ++k) {
            const double d_inter = ih * d_iw[k] + iw * d_ih[k];
            const double d_uni = d_area[k] - d_inter;
            d_iou[k] = (d_inter * uni - inter * d_uni) / (uni * uni);
        }
    }

    // Normalized center distance.
    const double dx = p.cx() - g.cx();
    const double dy = p.cy() - g.cy();
    const double rho2 = dx * dx + dy * dy;
    const Grad d_rho2{2.0 * dx, 2.0 * dy, dx, dy};
    const double cw = std::max(p.x2(), g.x2()) - std::min(p.x, g.x);
    const double ch = std::max(p.y2(), g.y2()) - std::min(p.y, g.y);
    const Grad d_cw{(p.x2() > g.x2() ? 1.0 : 0.0) - (p.x < g.x ? 1.0 : 0.0), 0.0,
                    p.x2() > g.x2() ? 1.0 : 0.0, 0.0};
    const Grad d_ch{0.0, (p.y2() > g.y2() ? 1.0 : 0.0) - (p.y < g.y ? 1.0 : 0.0), 0.0,
                    p.y2() > g.y2() ? 1.0 : 0.0};
    const double c2 = cw * cw + ch * ch;
    double dist = 0.0;
    Grad d_dist{};
    if (c2 > 0.0) {
        dist = rho2 / c2;
        for (int k = 0; k < 4; ++k) {
            const double d_c2 = 2.0 * cw * d_cw[k] + 2.0 * ch * d_ch[k];
            d_dist[k] = (d_rho2[k] * c2 - rho2 * d_c2) / (c2 * c2);
        }
    }

    // Aspect-ratio consistency.
    constexpr double kFourOverPi2 = 4.0 / (std::numbers::pi * std::numbers::pi);
    const double delta = std::atan2(g.w, g.h) - std::atan2(p.w, p.h);
    const double v = kFourOverPi2 * delta * delta;
    const auto d_atan = atan_ratio_grad(p.w, p.h);
    const Grad d_v{0.0, 0.0, -2.0 * kFourOverPi2 * delta * d_atan[0],
                   -2.0 * kFourOverPi2 * delta * d_atan[1]};
    const double s = (1.0 - iou_v) + v;
    double alpha = 0.0;
    Grad d_alpha{};
    if (s > 0.0) {
        alpha = v / s;
        for (int k = 0; k < 4; ++k) {
            const double d_s = -d_iou[k] + d_v[k];
            d_alpha[k] = (d_v[k] * s - v * d_s) / (s * s);
        }
    }

    out.loss = 1.0 - iou_v + dist + alpha * v;
    for (int k = 0; k < 4; ++k) {
        out.grad[k] = -d_iou[k] + d_dist[k] + d_alpha[k] * v + alpha * d_v[k];
    }
    return out;
}

}  // namespace playtrack
