#include "playtrack/association.hpp"

#include <stdexcept>

namespace playtrack {

namespace {

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

double spatial_similarity(const AssociationConfig& cfg, const BoundingBox& pred,
                          const BoundingBox& det, double buffer) {
    return similarity(cfg.metric, pred, det, buffer, cfg.geometry);
}

bool blocked(const AssociationConfig& cfg, double sim) {
    return sim <= 0.0 || sim < cfg.gate_threshold;
}

}  // namespace

void AssociationConfig::validate() const {
    if (!unit(b1) || !unit(b2)) throw std::invalid_argument("buffers b1, b2 must lie in [0, 1]");
    if (!(b2 < b1) && !(b1 == 0.0 && b2 == 0.0)) {
        throw std::invalid_argument("low-confidence buffer b2 must be smaller than b1");
    }
    if (!unit(high_conf_thresh) || !unit(low_conf_thresh) || low_conf_thresh > high_conf_thresh) {
        throw std::invalid_argument("confidence thresholds must satisfy 0 <= low <= high <= 1");
    }
    if (!unit(gate_threshold)) throw std::invalid_argument("gate_threshold must lie in [0, 1]");
    if (lambda_reid < 0.0 || lambda_ssim < 0.0 || !(lambda_reid + lambda_ssim > 0.0)) {
        throw std::invalid_argument("lambda_reid + lambda_ssim must be positive");
    }
}

CostMatrix hybrid_cost(const std::vector<TrackCandidate>& tracks,
                       const std::vector<Detection>& detections,
                       const std::vector<std::size_t>& detection_ids, const AssociationConfig& cfg) {
    CostMatrix cost(tracks.size(), detection_ids.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const auto& t = tracks[i];
        const bool track_has_reid = t.embedding != nullptr && t.embedding->norm() > 0.0;
        for (std::size_t j = 0; j < detection_ids.size(); ++j) {
            const Detection& d = detections[detection_ids[j]];
            const double sim = spatial_similarity(cfg, t.predicted, d.box, cfg.b1);
            if (blocked(cfg, sim)) cost.gate(i, j);
            if (track_has_reid && d.embedding && d.embedding->norm() > 0.0 && t.embedding->dim() == d.embedding->dim()) {
                const double s_reid = cosine_similarity(*t.embedding, *d.embedding);
                cost.at(i, j) = cfg.lambda_reid * (1.0 - s_reid) + cfg.lambda_ssim * (1.0 - sim);
            } else {
                cost.at(i, j) = 1.0 - sim;
            }
        }
    }
    return cost;
}

CostMatrix spatial_cost(const std::vector<TrackCandidate>& tracks,
                        const std::vector<Detection>& detections,
                        const std::vector<std::size_t>& detection_ids, const AssociationConfig& cfg,
                        double buffer) {
    CostMatrix cost(tracks.size(), detection_ids.size());
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        for (std::size_t j = 0; j < detection_ids.size(); ++j) {
            const double sim = spatial_similarity(cfg, tracks[i].predicted,
                                                  detections[detection_ids[j]].box, buffer);
            if (blocked(cfg, sim)) cost.gate(i, j);
            cost.at(i, j) = 1.0 - sim;
        }
    }
    return cost;
}

FrameAssociation associate_frame(const std::vector<TrackCandidate>& tracks,
                                 const std::vector<Detection>& detections,
                                 const AssociationConfig& cfg) {
    FrameAssociation out;
    std::vector<std::size_t> high, low;
    for (std::size_t j = 0; j < detections.size(); ++j) {
        const double s = detections[j].score;
        if (s >= cfg.high_conf_thresh) {
            high.push_back(j);
        } else if (s >= cfg.low_conf_thresh) {
            low.push_back(j);
        } else {
            out.discarded.push_back(j);
        }
    }

    const AssignmentResult first = solve_assignment(hybrid_cost(tracks, detections, high, cfg));
    for (const auto& [r, c] : first.matches) {
        out.matches.push_back({r, high[c], MatchStage::kHighConfidence});
    }
    for (std::size_t c : first.unmatched_cols) out.unmatched_high.push_back(high[c]);

    std::vector<TrackCandidate> leftover;
    std::vector<std::size_t> leftover_ids;
    for (std::size_t r : first.unmatched_rows) {
        leftover.push_back(tracks[r]);
        leftover_ids.push_back(r);
    }
    const AssignmentResult second =
        solve_assignment(spatial_cost(leftover, detections, low, cfg, cfg.b2));
    for (const auto& [r, c] : second.matches) {
        out.matches.push_back({leftover_ids[r], low[c], MatchStage::kLowConfidence});
    }
    for (std::size_t r : second.unmatched_rows) out.unmatched_tracks.push_back(leftover_ids[r]);
    for (std::size_t c : second.unmatched_cols) out.unmatched_low.push_back(low[c]);
    return out;
}

}  // namespace playtrack
