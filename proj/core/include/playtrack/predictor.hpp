#pragma once

#include <memory>
#include <span>
#include <string>

#include "playtrack/geometry.hpp"
#include "playtrack/motion_model.hpp"

namespace playtrack {

/// One observed box of a tracklet (pixel coordinates).
struct HistoryEntry {
    int frame = 0;
    BoundingBox box;
};

/// Predicts a tracklet's box one frame after its last observation.
class MotionPredictor {
public:
    virtual ~MotionPredictor() = default;
    /// history is chronological and non-empty; image size is used for normalization.
    [[nodiscard]] virtual BoundingBox predict(std::span<const HistoryEntry> history,
                                              double image_width, double image_height) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

/// Non-learned control: last box plus the last per-frame displacement.
class ConstantVelocityPredictor final : public MotionPredictor {
public:
    [[nodiscard]] BoundingBox predict(std::span<const HistoryEntry> history, double image_width,
                                      double image_height) const override;
    [[nodiscard]] std::string name() const override { return "constant-velocity"; }
};

/// The trained SSM/attention model. Histories shorter than 2 return the last box.
class LearnedPredictor final : public MotionPredictor {
public:
    explicit LearnedPredictor(ModelParams params);
    [[nodiscard]] BoundingBox predict(std::span<const HistoryEntry> history, double image_width,
                                      double image_height) const override;
    [[nodiscard]] std::string name() const override { return "learned"; }
    [[nodiscard]] const ModelParams& params() const { return params_; }

private:
    ModelParams params_;
};

}  // namespace playtrack
