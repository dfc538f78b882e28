#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace playtrack {

/// Fixed-dimension appearance vector with its norm cached at construction.
class AppearanceEmbedding {
public:
    AppearanceEmbedding() = default;
    explicit AppearanceEmbedding(Eigen::VectorXd values);

    [[nodiscard]] const Eigen::VectorXd& values() const { return values_; }
    [[nodiscard]] double norm() const { return norm_; }
    [[nodiscard]] Eigen::Index dim() const { return values_.size(); }
    [[nodiscard]] bool empty() const { return values_.size() == 0; }
    /// Unit-length copy. Throws std::invalid_argument on a zero vector.
    [[nodiscard]] AppearanceEmbedding normalized() const;

private:
    Eigen::VectorXd values_;
    double norm_ = 0.0;
};

/// a.b / (|a| |b|). Throws std::invalid_argument on zero norm or dimension mismatch.
double cosine_similarity(const AppearanceEmbedding& a, const AppearanceEmbedding& b);

/// What a provider may know about the detection it embeds.
struct FrameContext {
    int frame = 0;
    std::size_t detection_index = 0;
    int identity = -1;       ///< simulator identity tag; -1 when unknown
    double occlusion = 0.0;  ///< occluded fraction of the box, [0, 1]
    double blur = 0.0;       ///< motion-blur level, [0, 1]
};

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    /// Empty result means no embedding is available; the tracker then uses spatial cost only.
    [[nodiscard]] virtual std::optional<AppearanceEmbedding> embed(const FrameContext& ctx) const = 0;
};

/// Noise level of the synthetic provider: sigma = base + occlusion_gain * occlusion +
/// blur_gain * blur. The noise vector has expected norm sigma (per-component sigma/sqrt(dim)).
struct SyntheticNoise {
    double base = 0.0;
    double occlusion_gain = 0.0;
    double blur_gain = 0.0;
};

/// Identity-keyed vectors: base(id) plus gaussian noise that grows with occlusion and blur.
/// Base vectors are random gaussian directions normalized to unit length; with team_similarity
/// rho > 0, identities sharing `id % teams` are pulled toward a common team direction so that
/// same-team players look alike (cosine ~ rho).
class SyntheticEmbeddingProvider final : public EmbeddingProvider {
public:
    SyntheticEmbeddingProvider(int dim, std::uint64_t seed, SyntheticNoise noise = {},
                               int teams = 1, double team_similarity = 0.0);

    /// Overrides the base vector of one identity (normalized on insert).
    void set_base_vector(int identity, const Eigen::VectorXd& v);
    [[nodiscard]] Eigen::VectorXd base_vector(int identity) const;
    [[nodiscard]] double noise_sigma(const FrameContext& ctx) const;
    [[nodiscard]] std::optional<AppearanceEmbedding> embed(const FrameContext& ctx) const override;

private:
    int dim_;
    std::uint64_t seed_;
    SyntheticNoise noise_;
    int teams_;
    double team_similarity_;
    std::map<int, Eigen::VectorXd> overrides_;
};

/// Precomputed embeddings keyed by (frame, detection index).
class FileEmbeddingProvider final : public EmbeddingProvider {
public:
    explicit FileEmbeddingProvider(std::map<std::pair<int, std::size_t>, AppearanceEmbedding> rows);
    [[nodiscard]] std::optional<AppearanceEmbedding> embed(const FrameContext& ctx) const override;
    [[nodiscard]] std::size_t size() const { return rows_.size(); }

private:
    std::map<std::pair<int, std::size_t>, AppearanceEmbedding> rows_;
};

}  // namespace playtrack
