#pragma once

#include <memory>
#include <vector>

#include "playtrack/association.hpp"
#include "playtrack/mot_io.hpp"
#include "playtrack/predictor.hpp"
#include "playtrack/track_manager.hpp"

namespace playtrack {

/// Online tracker: predict -> associate_frame -> step, one frame at a time.
class Tracker {
public:
    Tracker(TrackerConfig tracker_cfg, AssociationConfig assoc_cfg,
            std::shared_ptr<const MotionPredictor> predictor, double image_width,
            double image_height);

    /// Processes the detections of `frame` (frames must be passed in increasing order).
    std::vector<TrackedObject> process(int frame, const std::vector<Detection>& detections);

    [[nodiscard]] const TrackManager& manager() const { return manager_; }
    [[nodiscard]] const FrameAssociation& last_association() const { return last_; }

private:
    AssociationConfig assoc_cfg_;
    std::shared_ptr<const MotionPredictor> predictor_;
    double image_width_;
    double image_height_;
    TrackManager manager_;
    FrameAssociation last_;
};

struct TrackingRun {
    LabeledFrames results;
    int frames = 0;
    double core_seconds = 0.0;  ///< time spent in Tracker::process only
    [[nodiscard]] double fps() const { return core_seconds > 0.0 ? frames / core_seconds : 0.0; }
};

/// Runs the tracker over frames 1..seq.last_frame(). A null predictor uses constant velocity.
TrackingRun run_sequence(const SequenceData& seq, const TrackerConfig& tracker_cfg,
                         const AssociationConfig& assoc_cfg,
                         std::shared_ptr<const MotionPredictor> predictor = nullptr);

}  // namespace playtrack
