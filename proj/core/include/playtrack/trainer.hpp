#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "playtrack/losses.hpp"
#include "playtrack/motion_model.hpp"

namespace playtrack {

/// One identity's chronological boxes in normalized coordinates. `inputs` is what the model
/// sees (possibly noisy detections); `targets` is the supervision (ground truth). Both have
/// the same length; when built from ground truth alone they are identical.
struct TrainingTracklet {
    std::vector<BoundingBox> inputs;
    std::vector<BoundingBox> targets;
    double image_width = 1.0;
    double image_height = 1.0;
};

struct TrainingSample {
    TrackletWindow window;
    BoundingBox target;
    double image_width = 1.0;
    double image_height = 1.0;
};

/// Probabilities and ranges of the temporal and spatial augmentations. Spatial magnitudes
/// are fractions of the image dimension (i.e. normalized units).
struct AugmentConfig {
    double p_temporal = 1.0;
    double p_scale = 0.5;
    double p_translate = 0.5;
    double p_noise = 0.5;
    double scale_min = 0.9;
    double scale_max = 1.1;
    double translate = 0.02;
    double noise_sigma = 0.005;

    void validate() const;
};

struct TrainConfig {
    int epochs = 60;
    int batch_size = 64;
    double lr = 1e-4;
    double weight_decay = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.98;
    double adam_eps = 1e-8;
    LossWeights loss;
    int window = 10;
    std::uint64_t seed = 0;
    AugmentConfig augment;

    void validate() const;
};

/// Which transforms augment() applied, for inspection in tests.
struct AugmentTrace {
    std::size_t start = 0;
    std::size_t length = 0;
    bool scaled = false;
    bool translated = false;
    bool noised = false;
    double scale = 1.0;
    double tx = 0.0;
    double ty = 0.0;
};

/// Draws one training sample from a tracklet: a contiguous window of length in [2, w] followed
/// by its target, left-padded to w. At most two of {scale, translate, noise} are applied; the
/// affine part is shared by window and target, noise touches the window only.
/// Throws std::invalid_argument when the tracklet has fewer than 3 boxes.
TrainingSample augment(const TrainingTracklet& tracklet, int window, const AugmentConfig& cfg,
                       std::mt19937_64& rng, AugmentTrace* trace = nullptr);

/// Deterministic evaluation samples: random window position and length, no spatial transforms.
std::vector<TrainingSample> make_eval_samples(const std::vector<TrainingTracklet>& tracklets,
                                              int window, std::uint64_t seed);

/// Mean center displacement in pixels between predictions and targets.
double mean_displacement_error(const std::vector<TrainingSample>& samples,
                               const std::function<BoundingBox(const TrackletWindow&)>& predictor);

/// Extrapolates the last valid box by the last inter-step displacement.
BoundingBox constant_velocity(const TrackletWindow& window);

/// Decoupled-weight-decay Adam over the flat parameter set.
class AdamW {
public:
    AdamW(const ModelParams& shape, const TrainConfig& cfg);
    void step(ModelParams& params, const ModelGradients& grads);
    [[nodiscard]] long steps() const { return step_; }

private:
    double lr_, wd_, beta1_, beta2_, eps_;
    long step_ = 0;
    ModelParams m_, v_;
};

struct LossAndGrad {
    double loss = 0.0;
    PredictedBox prediction;
};

/// Loss of one sample; adds its gradient scaled by `grad_scale` into grads.
LossAndGrad accumulate_sample_gradient(const TrainingSample& sample, const ModelParams& params,
                                       const LossWeights& weights, double grad_scale,
                                       ModelGradients& grads);

struct EpochStats {
    int epoch = 0;
    double mean_loss = 0.0;
    double ade_val = 0.0;  ///< NaN when no validation set was given
};

struct TrainResult {
    ModelParams params;
    std::vector<EpochStats> curve;
    int selected_epoch = 0;  ///< epoch whose parameters were returned
};

class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TrainHooks {
    std::vector<TrainingSample> validation;
    /// Return the parameters of the epoch with the lowest validation ADE instead of the last.
    bool keep_best = false;
    std::function<void(const EpochStats&, const ModelParams&)> on_epoch;
};

/// Trains from a fresh initialization seeded by cfg.seed. Throws TrainingDiverged when a loss
/// or gradient becomes non-finite, std::invalid_argument on an empty dataset.
TrainResult train(const std::vector<TrainingTracklet>& dataset, const ModelConfig& model_cfg,
                  const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Continues training from existing parameters.
TrainResult train_from(ModelParams params, const std::vector<TrainingTracklet>& dataset,
                       const TrainConfig& cfg, const TrainHooks& hooks = {});

/// Writes the loss curve as CSV: epoch,mean_loss,ade_val.
void write_training_log(const std::string& path, const std::vector<EpochStats>& curve);

}  // namespace playtrack
