#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "playtrack/appearance.hpp"
#include "playtrack/association.hpp"
#include "playtrack/detection.hpp"
#include "playtrack/predictor.hpp"

namespace playtrack {

struct TrackerConfig {
    int max_lost = 30;       ///< frames a Lost tracklet is remembered
    int min_hits = 1;        ///< matches before a tracklet is reported
    int history = 10;        ///< boxes kept per tracklet (the model window)
    double ema_alpha = 0.9;
    double ema_sigma = 0.1;  ///< minimum confidence in the dynamic smoothing factor
    bool ema_convex = false; ///< alpha_d * e + (1 - alpha_d) * f instead of alpha * e + ...

    void validate() const;
};

/// alpha_d = alpha + (1 - alpha) (1 - (s - sigma)) / (1 - sigma), clamped to [alpha, 1].
double dynamic_alpha(double score, double alpha, double sigma);

/// Confidence-weighted update alpha * e_old + (1 - alpha_d) * f_new (or the convex variant),
/// returned at unit length. A zero f_new leaves e_old unchanged.
AppearanceEmbedding dynamic_ema(const AppearanceEmbedding& e_old, const AppearanceEmbedding& f_new,
                                double score, double alpha, double sigma, bool convex = false);

enum class TrackState { kActive, kLost, kDeleted };

struct Tracklet {
    int id = 0;
    TrackState state = TrackState::kActive;
    std::deque<HistoryEntry> history;  ///< at most TrackerConfig::history entries
    std::optional<AppearanceEmbedding> embedding;
    BoundingBox prediction;  ///< box expected at the next frame; frozen while Lost
    double score = 0.0;
    int start_frame = 0;
    int last_seen = 0;
    int hits = 0;

    [[nodiscard]] int age(int frame) const { return frame - start_frame; }
};

/// Output row for one frame.
struct TrackedObject {
    int frame = 0;
    int id = 0;
    BoundingBox box;
    double score = 0.0;
};

/// Tracklet lifecycle: update matched, spawn from unmatched high-confidence detections,
/// move unmatched to Lost, delete after max_lost frames without a match.
class TrackManager {
public:
    explicit TrackManager(TrackerConfig cfg);

    /// Live (Active or Lost) tracklets in creation order; indices match associate_frame input.
    [[nodiscard]] const std::vector<Tracklet>& tracklets() const { return tracks_; }
    std::vector<Tracklet>& tracklets() { return tracks_; }

    /// Candidates for association, in the same order as tracklets().
    [[nodiscard]] std::vector<TrackCandidate> candidates() const;

    /// Applies one frame's association. Returns the tracklets reported at this frame, sorted by id.
    std::vector<TrackedObject> step(const FrameAssociation& assoc,
                                    const std::vector<Detection>& detections, int frame);

    /// Applies a match to one tracklet (history, state, embedding).
    void update(Tracklet& track, const Detection& detection, int frame) const;

    [[nodiscard]] int next_id() const { return next_id_; }
    [[nodiscard]] std::size_t deleted_count() const { return deleted_; }
    [[nodiscard]] const TrackerConfig& config() const { return cfg_; }

private:
    TrackerConfig cfg_;
    std::vector<Tracklet> tracks_;
    int next_id_ = 1;
    std::size_t deleted_ = 0;
};

}  // namespace playtrack
