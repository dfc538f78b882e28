#include "playtrack/tracker.hpp"

#include <chrono>
#include <span>
#include <stdexcept>

namespace playtrack {

Tracker::Tracker(TrackerConfig tracker_cfg, AssociationConfig assoc_cfg,
                 std::shared_ptr<const MotionPredictor> predictor, double image_width,
                 double image_height)
    : assoc_cfg_(assoc_cfg),
      predictor_(predictor ? std::move(predictor) : std::make_shared<ConstantVelocityPredictor>()),
      image_width_(image_width),
      image_height_(image_height),
      manager_(tracker_cfg) {
    assoc_cfg_.validate();
    if (!(image_width > 0.0 && image_height > 0.0)) throw std::invalid_argument("image size must be positive");
}

std::vector<TrackedObject> Tracker::process(int frame, const std::vector<Detection>& detections) {
    last_ = associate_frame(manager_.candidates(), detections, assoc_cfg_);
    auto out = manager_.step(last_, detections, frame);
    // Tracks observed this frame get a fresh one-step-ahead prediction; Lost tracks keep theirs.
    for (Tracklet& t : manager_.tracklets()) {
        if (t.last_seen != frame) continue;
        std::vector<HistoryEntry> history(t.history.begin(), t.history.end());
        t.prediction = predictor_->predict(std::span<const HistoryEntry>(history), image_width_,
                                           image_height_);
    }
    return out;
}

TrackingRun run_sequence(const SequenceData& seq, const TrackerConfig& tracker_cfg,
                         const AssociationConfig& assoc_cfg,
                         std::shared_ptr<const MotionPredictor> predictor) {
    Tracker tracker(tracker_cfg, assoc_cfg, std::move(predictor), seq.image_width, seq.image_height);
    TrackingRun run;
    const std::vector<Detection> none;
    const int last = seq.last_frame();
    using clock = std::chrono::steady_clock;
    for (int frame = 1; frame <= last; ++frame) {
        const auto it = seq.frames.find(frame);
        const auto& dets = it == seq.frames.end() ? none : it->second;
        const auto t0 = clock::now();
        auto objects = tracker.process(frame, dets);
        run.core_seconds += std::chrono::duration<double>(clock::now() - t0).count();
        auto& rows = run.results[frame];
        for (const auto& o : objects) rows.push_back({o.id, o.box, o.score});
        if (rows.empty()) run.results.erase(frame);
    }
    run.frames = last;
    return run;
}

}  // namespace playtrack
