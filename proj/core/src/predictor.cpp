#include "playtrack/predictor.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

namespace playtrack {

BoundingBox ConstantVelocityPredictor::predict(std::span<const HistoryEntry> history, double,
                                               double) const {
    if (history.empty()) throw std::invalid_argument("empty history");
    const HistoryEntry& last = history.back();
    if (history.size() < 2) return last.box;
    const HistoryEntry& prev = history[history.size() - 2];
    const double gap = std::max(1, last.frame - prev.frame);
    const BoundingBox& a = last.box;
    const BoundingBox& b = prev.box;
    return {a.x + (a.x - b.x) / gap, a.y + (a.y - b.y) / gap,
            std::max(a.w + (a.w - b.w) / gap, 0.0), std::max(a.h + (a.h - b.h) / gap, 0.0)};
}

LearnedPredictor::LearnedPredictor(ModelParams params) : params_(std::move(params)) {
    params_.config.validate();
}

BoundingBox LearnedPredictor::predict(std::span<const HistoryEntry> history, double image_width,
                                      double image_height) const {
    if (history.empty()) throw std::invalid_argument("empty history");
    if (history.size() < 2) return history.back().box;
    const std::size_t window = static_cast<std::size_t>(params_.config.window);
    const std::size_t take = std::min(window, history.size());
    std::vector<BoundingBox> normalized;
    normalized.reserve(take);
    for (std::size_t i = history.size() - take; i < history.size(); ++i) {
        const BoundingBox& b = history[i].box;
        normalized.push_back({b.x / image_width, b.y / image_height, b.w / image_width,
                              b.h / image_height});
    }
    const PredictedBox p = playtrack::predict(TrackletWindow::from_history(normalized, window), params_);
    return {p.box.x * image_width, p.box.y * image_height, p.box.w * image_width,
            p.box.h * image_height};
}

}  // namespace playtrack
