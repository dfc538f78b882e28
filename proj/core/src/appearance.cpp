#include "playtrack/appearance.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace playtrack {

namespace {

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    // splitmix64 finalizer over a combined key
    std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::VectorXd gaussian_direction(int dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v(i) = g(rng);
    return v.normalized();
}

}  // namespace

AppearanceEmbedding::AppearanceEmbedding(Eigen::VectorXd values)
    : values_(std::move(values)), norm_(values_.norm()) {
    if (!values_.allFinite()) throw std::invalid_argument("embedding has non-finite values");
}

AppearanceEmbedding AppearanceEmbedding::normalized() const {
    if (norm_ <= 0.0) throw std::invalid_argument("cannot normalize a zero embedding");
    return AppearanceEmbedding(values_ / norm_);
}

double cosine_similarity(const AppearanceEmbedding& a, const AppearanceEmbedding& b) {
    if (a.dim() != b.dim()) throw std::invalid_argument("embedding dimensions differ");
    if (a.norm() <= 0.0 || b.norm() <= 0.0) {
        throw std::invalid_argument("cosine similarity of a zero embedding");
    }
    const double s = a.values().dot(b.values()) / (a.norm() * b.norm());
    return std::clamp(s, -1.0, 1.0);
}

SyntheticEmbeddingProvider::SyntheticEmbeddingProvider(int dim, std::uint64_t seed,
                                                       SyntheticNoise noise, int teams,
                                                       double team_similarity)
    : dim_(dim), seed_(seed), noise_(noise), teams_(std::max(teams, 1)),
      team_similarity_(team_similarity) {
    if (dim <= 0) throw std::invalid_argument("embedding dimension must be positive");
    if (team_similarity < 0.0 || team_similarity >= 1.0) {
        throw std::invalid_argument("team_similarity must lie in [0, 1)");
    }
}

void SyntheticEmbeddingProvider::set_base_vector(int identity, const Eigen::VectorXd& v) {
    if (v.size() != dim_ || v.norm() <= 0.0) throw std::invalid_argument("bad base vector");
    overrides_[identity] = v.normalized();
}

Eigen::VectorXd SyntheticEmbeddingProvider::base_vector(int identity) const {
    if (auto it = overrides_.find(identity); it != overrides_.end()) return it->second;
    const Eigen::VectorXd own = gaussian_direction(dim_, mix(seed_, static_cast<std::uint64_t>(identity)));
    if (team_similarity_ <= 0.0) return own;
    const int team = ((identity % teams_) + teams_) % teams_;
    const Eigen::VectorXd shared =
        gaussian_direction(dim_, mix(seed_ ^ 0x7ea5a11eULL, static_cast<std::uint64_t>(team)));
    return (std::sqrt(team_similarity_) * shared + std::sqrt(1.0 - team_similarity_) * own).normalized();
}

double SyntheticEmbeddingProvider::noise_sigma(const FrameContext& ctx) const {
    return noise_.base + noise_.occlusion_gain * ctx.occlusion + noise_.blur_gain * ctx.blur;
}

std::optional<AppearanceEmbedding> SyntheticEmbeddingProvider::embed(const FrameContext& ctx) const {
    if (ctx.identity < 0) return std::nullopt;
    Eigen::VectorXd v = base_vector(ctx.identity);
    const double sigma = noise_sigma(ctx);
    if (sigma > 0.0) {
        std::mt19937_64 rng(mix(mix(seed_, static_cast<std::uint64_t>(ctx.frame)),
                                static_cast<std::uint64_t>(ctx.detection_index) + 1));
        std::normal_distribution<double> g(0.0, sigma / std::sqrt(static_cast<double>(dim_)));
        for (int i = 0; i < dim_; ++i) v(i) += g(rng);
    }
    return AppearanceEmbedding(std::move(v));
}

FileEmbeddingProvider::FileEmbeddingProvider(
    std::map<std::pair<int, std::size_t>, AppearanceEmbedding> rows)
    : rows_(std::move(rows)) {}

std::optional<AppearanceEmbedding> FileEmbeddingProvider::embed(const FrameContext& ctx) const {
    if (auto it = rows_.find({ctx.frame, ctx.detection_index}); it != rows_.end()) return it->second;
    return std::nullopt;
}

}  // namespace playtrack
