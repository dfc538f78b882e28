#include "playtrack/track_manager.hpp"

#include <algorithm>
#include <stdexcept>

namespace playtrack {

void TrackerConfig::validate() const {
    if (max_lost < 0 || min_hits < 1 || history < 2) {
        throw std::invalid_argument("max_lost >= 0, min_hits >= 1 and history >= 2 required");
    }
    if (!(ema_alpha > 0.0 && ema_alpha < 1.0)) throw std::invalid_argument("ema_alpha must lie in (0, 1)");
    if (!(ema_sigma >= 0.0 && ema_sigma < 1.0)) throw std::invalid_argument("ema_sigma must lie in [0, 1)");
}

double dynamic_alpha(double score, double alpha, double sigma) {
    if (!(sigma < 1.0)) throw std::invalid_argument("sigma must be < 1");
    const double raw = alpha + (1.0 - alpha) * (1.0 - (score - sigma)) / (1.0 - sigma);
    return std::clamp(raw, alpha, 1.0);
}

AppearanceEmbedding dynamic_ema(const AppearanceEmbedding& e_old, const AppearanceEmbedding& f_new,
                                double score, double alpha, double sigma, bool convex) {
    if (f_new.norm() <= 0.0) return e_old;
    const double alpha_d = dynamic_alpha(score, alpha, sigma);
    const double keep = convex ? alpha_d : alpha;
    Eigen::VectorXd mixed = keep * e_old.values() + (1.0 - alpha_d) * f_new.normalized().values();
    if (mixed.norm() <= 0.0) return e_old;
    return AppearanceEmbedding(mixed.normalized());
}

TrackManager::TrackManager(TrackerConfig cfg) : cfg_(cfg) { cfg_.validate(); }

std::vector<TrackCandidate> TrackManager::candidates() const {
    std::vector<TrackCandidate> out;
    out.reserve(tracks_.size());
    for (const auto& t : tracks_) {
        out.push_back({t.prediction, t.embedding ? &*t.embedding : nullptr});
    }
    return out;
}

void TrackManager::update(Tracklet& track, const Detection& detection, int frame) const {
    track.history.push_back({frame, detection.box});
    while (track.history.size() > static_cast<std::size_t>(cfg_.history)) track.history.pop_front();
    track.state = TrackState::kActive;
    track.last_seen = frame;
    track.score = detection.score;
    track.prediction = detection.box;
    ++track.hits;
    if (detection.embedding && detection.embedding->norm() > 0.0) {
        if (track.embedding) {
            track.embedding = dynamic_ema(*track.embedding, *detection.embedding, detection.score,
                                          cfg_.ema_alpha, cfg_.ema_sigma, cfg_.ema_convex);
        } else {
            track.embedding = detection.embedding->normalized();
        }
    }
}

std::vector<TrackedObject> TrackManager::step(const FrameAssociation& assoc,
                                              const std::vector<Detection>& detections, int frame) {
    std::vector<char> matched(tracks_.size(), 0);
    for (const auto& m : assoc.matches) {
        update(tracks_[m.track], detections[m.detection], frame);
        matched[m.track] = 1;
    }
    for (std::size_t i = 0; i < tracks_.size(); ++i) {
        if (matched[i]) continue;
        Tracklet& t = tracks_[i];
        t.state = frame - t.last_seen > cfg_.max_lost ? TrackState::kDeleted : TrackState::kLost;
    }
    const auto before = tracks_.size();
    std::erase_if(tracks_, [](const Tracklet& t) { return t.state == TrackState::kDeleted; });
    deleted_ += before - tracks_.size();

    for (std::size_t j : assoc.unmatched_high) {
        Tracklet t;
        t.id = next_id_++;
        t.start_frame = frame;
        t.last_seen = frame - 1;
        update(t, detections[j], frame);
        tracks_.push_back(std::move(t));
    }

    std::vector<TrackedObject> out;
    for (const auto& t : tracks_) {
        if (t.state == TrackState::kActive && t.last_seen == frame && t.hits >= cfg_.min_hits) {
            out.push_back({frame, t.id, t.history.back().box, t.score});
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
    return out;
}

}  // namespace playtrack
