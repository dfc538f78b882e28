#pragma once

#include <cstddef>
#include <vector>

#include "playtrack/assignment.hpp"
#include "playtrack/detection.hpp"
#include "playtrack/geometry.hpp"

namespace playtrack {

struct AssociationConfig {
    double b1 = 0.4;  ///< buffer of the high-confidence stage
    double b2 = 0.3;  ///< stricter buffer of the low-confidence stage
    double lambda_reid = 0.5;
    double lambda_ssim = 0.5;
    double high_conf_thresh = 0.6;
    double low_conf_thresh = 0.1;
    /// Pairs whose spatial similarity is <= 0 or below this value are never matched.
    double gate_threshold = 0.0;
    SimilarityMetric metric = SimilarityMetric::kHAEIoU;
    GeometryOptions geometry;

    /// Requires buffers in [0,1] with b2 < b1 (b1 = b2 = 0 is accepted as the unbuffered
    /// control), thresholds in [0,1] with low <= high, non-negative weights with positive sum.
    void validate() const;
};

/// What association needs to know about a tracklet at the current frame.
struct TrackCandidate {
    BoundingBox predicted;
    const AppearanceEmbedding* embedding = nullptr;  ///< null when no appearance is known
};

/// High-confidence cost: lambda_reid (1 - S_reid) + lambda_ssim (1 - sim) with buffer b1.
/// Pairs lacking an embedding on either side fall back to 1 - sim.
CostMatrix hybrid_cost(const std::vector<TrackCandidate>& tracks,
                       const std::vector<Detection>& detections,
                       const std::vector<std::size_t>& detection_ids, const AssociationConfig& cfg);

/// Spatial-only cost 1 - sim with the given buffer.
CostMatrix spatial_cost(const std::vector<TrackCandidate>& tracks,
                        const std::vector<Detection>& detections,
                        const std::vector<std::size_t>& detection_ids, const AssociationConfig& cfg,
                        double buffer);

enum class MatchStage { kHighConfidence, kLowConfidence };

struct TrackMatch {
    std::size_t track = 0;
    std::size_t detection = 0;
    MatchStage stage = MatchStage::kHighConfidence;
};

struct FrameAssociation {
    std::vector<TrackMatch> matches;
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_high;  ///< candidates for new tracklets
    std::vector<std::size_t> unmatched_low;   ///< dropped, never spawn tracklets
    std::vector<std::size_t> discarded;       ///< score below low_conf_thresh
};

/// Two-stage cascade: high-confidence detections against all tracks with the hybrid cost,
/// then the leftover tracks against low-confidence detections with the spatial cost at b2.
FrameAssociation associate_frame(const std::vector<TrackCandidate>& tracks,
                                 const std::vector<Detection>& detections,
                                 const AssociationConfig& cfg);

}  // namespace playtrack
