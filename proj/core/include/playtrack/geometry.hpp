#pragma once

#include <array>
#include <string>
#include <string_view>

namespace playtrack {

/// Axis-aligned box in top-left / width / height form. Image convention: y grows downward.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    [[nodiscard]] double x2() const { return x + w; }
    [[nodiscard]] double y2() const { return y + h; }
    [[nodiscard]] double cx() const { return x + 0.5 * w; }
    [[nodiscard]] double cy() const { return y + 0.5 * h; }
    [[nodiscard]] double area() const { return w * h; }
    [[nodiscard]] bool valid() const { return w >= 0.0 && h >= 0.0; }

    [[nodiscard]] std::array<double, 4> as_array() const { return {x, y, w, h}; }
    static BoundingBox from_array(const std::array<double, 4>& v) { return {v[0], v[1], v[2], v[3]}; }

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Spatial similarity used by the association stages.
enum class SimilarityMetric {
    kIoU,    ///< plain IoU, buffers ignored
    kEIoU,   ///< IoU of buffer-expanded boxes
    kHIoU,   ///< height IoU times plain IoU (height adaptation without buffers)
    kHAEIoU  ///< height IoU times EIoU
};

SimilarityMetric parse_metric(std::string_view name);
std::string to_string(SimilarityMetric metric);

struct GeometryOptions {
    /// Take |numerator| in the height overlap instead of clamping it at zero.
    bool hiou_abs = false;
    /// Compute the height factor of HA-EIoU on the expanded boxes instead of the originals.
    bool hiou_on_expanded = false;
};

double iou(const BoundingBox& a, const BoundingBox& b);

/// Grows the box symmetrically about its center by buffer * (w, h). Throws on buffer outside [0,1].
BoundingBox expand(const BoundingBox& b, double buffer);

double eiou(const BoundingBox& a, const BoundingBox& b, double buffer);

/// Overlap of the vertical extents over their combined vertical span.
double hiou(const BoundingBox& a, const BoundingBox& b, bool abs_numerator = false);

double ha_eiou(const BoundingBox& a, const BoundingBox& b, double buffer,
               const GeometryOptions& opts = {});

/// Dispatches to the metric selected for association.
double similarity(SimilarityMetric metric, const BoundingBox& a, const BoundingBox& b,
                  double buffer, const GeometryOptions& opts = {});

/// Complete-IoU loss: 1 - IoU + rho^2/c^2 + alpha*v.
double ciou_loss(const BoundingBox& pred, const BoundingBox& gt);

/// CIoU loss together with its gradient with respect to pred (x, y, w, h).
/// alpha is differentiated as well, so the gradient matches finite differences.
struct CiouResult {
    double loss = 0.0;
    std::array<double, 4> grad{};
};
CiouResult ciou_loss_with_grad(const BoundingBox& pred, const BoundingBox& gt);

}  // namespace playtrack
