#include "playtrack/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>

#include "playtrack/parallel.hpp"

namespace playtrack {

namespace {

constexpr std::size_t kGradientChunks = 8;
constexpr double kMinExtent = 1e-4;

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void AugmentConfig::validate() const {
    if (!in_unit(p_temporal) || !in_unit(p_scale) || !in_unit(p_translate) || !in_unit(p_noise)) {
        throw std::invalid_argument("augmentation probabilities must lie in [0, 1]");
    }
    if (!(scale_min > 0.0 && scale_min <= scale_max)) {
        throw std::invalid_argument("augmentation scale range must be positive and ordered");
    }
    if (translate < 0.0 || noise_sigma < 0.0) {
        throw std::invalid_argument("augmentation magnitudes must be non-negative");
    }
}

void TrainConfig::validate() const {
    if (epochs <= 0 || batch_size <= 0 || window < 2) {
        throw std::invalid_argument("epochs and batch_size must be positive, window >= 2");
    }
    if (!(lr > 0.0) || weight_decay < 0.0 || !(adam_eps > 0.0)) {
        throw std::invalid_argument("lr must be positive and weight_decay non-negative");
    }
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
        throw std::invalid_argument("Adam betas must lie in (0, 1)");
    }
    if (loss.l1 < 0.0 || loss.ciou < 0.0) {
        throw std::invalid_argument("loss weights must be non-negative");
    }
    augment.validate();
}

TrainingSample augment(const TrainingTracklet& tracklet, int window, const AugmentConfig& cfg,
                       std::mt19937_64& rng, AugmentTrace* trace) {
    const std::size_t n = tracklet.inputs.size();
    if (n < 3 || tracklet.targets.size() != n) {
        throw std::invalid_argument("tracklet needs at least 3 boxes with matching targets");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const std::size_t max_len = std::min<std::size_t>(static_cast<std::size_t>(window), n - 1);

    AugmentTrace t;
    if (unit(rng) < cfg.p_temporal) {
        std::uniform_int_distribution<std::size_t> len_dist(2, max_len);
        t.length = len_dist(rng);
        std::uniform_int_distribution<std::size_t> start_dist(0, n - 1 - t.length);
        t.start = start_dist(rng);
    } else {
        t.length = max_len;
        t.start = n - 1 - t.length;
    }

    t.scaled = unit(rng) < cfg.p_scale;
    t.translated = unit(rng) < cfg.p_translate;
    t.noised = unit(rng) < cfg.p_noise;
    if (t.scaled && t.translated && t.noised) {
        // never all three at once: drop one uniformly
        switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
            case 0: t.scaled = false; break;
            case 1: t.translated = false; break;
            default: t.noised = false; break;
        }
    }
    if (t.scaled) t.scale = std::uniform_real_distribution<double>(cfg.scale_min, cfg.scale_max)(rng);
    if (t.translated) {
        std::uniform_real_distribution<double> shift(-cfg.translate, cfg.translate);
        t.tx = shift(rng);
        t.ty = shift(rng);
    }

    auto affine = [&](BoundingBox b) {
        b.x = b.x * t.scale + t.tx;
        b.y = b.y * t.scale + t.ty;
        b.w *= t.scale;
        b.h *= t.scale;
        return b;
    };

    std::vector<BoundingBox> history;
    history.reserve(t.length);
    std::normal_distribution<double> noise(0.0, cfg.noise_sigma);
    for (std::size_t i = t.start; i < t.start + t.length; ++i) {
        BoundingBox b = affine(tracklet.inputs[i]);
        if (t.noised) {
            b.x += noise(rng);
            b.y += noise(rng);
            b.w = std::max(b.w + noise(rng), kMinExtent);
            b.h = std::max(b.h + noise(rng), kMinExtent);
        }
        history.push_back(b);
    }

    TrainingSample s;
    s.window = TrackletWindow::from_history(history, static_cast<std::size_t>(window));
    s.target = affine(tracklet.targets[t.start + t.length]);
    s.image_width = tracklet.image_width;
    s.image_height = tracklet.image_height;
    if (trace != nullptr) *trace = t;
    return s;
}

std::vector<TrainingSample> make_eval_samples(const std::vector<TrainingTracklet>& tracklets,
                                              int window, std::uint64_t seed) {
    AugmentConfig plain;
    plain.p_scale = plain.p_translate = plain.p_noise = 0.0;
    std::mt19937_64 rng(seed);
    std::vector<TrainingSample> out;
    for (const auto& t : tracklets) {
        if (t.inputs.size() < 3) continue;
        out.push_back(augment(t, window, plain, rng));
    }
    return out;
}

double mean_displacement_error(const std::vector<TrainingSample>& samples,
                               const std::function<BoundingBox(const TrackletWindow&)>& predictor) {
    if (samples.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const auto& s : samples) {
        const BoundingBox p = predictor(s.window);
        const double dx = (p.cx() - s.target.cx()) * s.image_width;
        const double dy = (p.cy() - s.target.cy()) * s.image_height;
        total += std::hypot(dx, dy);
    }
    return total / static_cast<double>(samples.size());
}

BoundingBox constant_velocity(const TrackletWindow& window) {
    const BoundingBox* last = nullptr;
    const BoundingBox* prev = nullptr;
    for (std::size_t i = window.boxes.size(); i-- > 0;) {
        if (!window.mask[i]) continue;
        if (last == nullptr) {
            last = &window.boxes[i];
        } else {
            prev = &window.boxes[i];
            break;
        }
    }
    if (last == nullptr) throw std::invalid_argument("window has no valid steps");
    if (prev == nullptr) return *last;
    return {2.0 * last->x - prev->x, 2.0 * last->y - prev->y, std::max(2.0 * last->w - prev->w, 0.0),
            std::max(2.0 * last->h - prev->h, 0.0)};
}

AdamW::AdamW(const ModelParams& shape, const TrainConfig& cfg)
    : lr_(cfg.lr),
      wd_(cfg.weight_decay),
      beta1_(cfg.beta1),
      beta2_(cfg.beta2),
      eps_(cfg.adam_eps),
      m_(ModelParams::zeros(shape.config)),
      v_(ModelParams::zeros(shape.config)) {}

void AdamW::step(ModelParams& params, const ModelGradients& grads) {
    ++step_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    std::vector<const Matrix*> g;
    std::vector<Matrix*> m, v;
    grads.for_each_tensor([&](const std::string&, const Matrix& t) { g.push_back(&t); });
    m_.for_each_tensor([&](const std::string&, Matrix& t) { m.push_back(&t); });
    v_.for_each_tensor([&](const std::string&, Matrix& t) { v.push_back(&t); });
    std::size_t i = 0;
    params.for_each_tensor([&](const std::string&, Matrix& p) {
        auto pa = p.array();
        const auto ga = g[i]->array();
        auto ma = m[i]->array();
        auto va = v[i]->array();
        pa *= 1.0 - lr_ * wd_;
        ma = beta1_ * ma + (1.0 - beta1_) * ga;
        va = beta2_ * va + (1.0 - beta2_) * ga.square();
        pa -= lr_ * (ma / bc1) / ((va / bc2).sqrt() + eps_);
        ++i;
    });
}

LossAndGrad accumulate_sample_gradient(const TrainingSample& sample, const ModelParams& params,
                                       const LossWeights& weights, double grad_scale,
                                       ModelGradients& grads) {
    const ForwardResult fwd = forward(sample.window, params);
    const LossResult loss = total_loss(fwd.prediction.box, sample.target, weights);
    std::array<double, 4> d_pred{};
    for (std::size_t k = 0; k < 4; ++k) d_pred[k] = loss.grad[k] * grad_scale;
    backward_accumulate(fwd, params, d_pred, grads);
    return {loss.loss, fwd.prediction};
}

TrainResult train(const std::vector<TrainingTracklet>& dataset, const ModelConfig& model_cfg,
                  const TrainConfig& cfg, const TrainHooks& hooks) {
    ModelConfig mc = model_cfg;
    mc.window = cfg.window;
    return train_from(ModelParams::initialize(mc, cfg.seed), dataset, cfg, hooks);
}

TrainResult train_from(ModelParams params, const std::vector<TrainingTracklet>& dataset,
                       const TrainConfig& cfg, const TrainHooks& hooks) {
    cfg.validate();
    std::vector<std::size_t> usable;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset[i].inputs.size() >= 3 && dataset[i].targets.size() == dataset[i].inputs.size()) {
            usable.push_back(i);
        }
    }
    if (usable.empty()) throw std::invalid_argument("training dataset has no usable tracklets");

    TrainResult result;
    AdamW opt(params, cfg);
    std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<ModelGradients> chunk_grads(kGradientChunks, ModelParams::zeros(params.config));
    std::vector<double> chunk_loss(kGradientChunks);
    ModelGradients total = ModelParams::zeros(params.config);

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(usable.begin(), usable.end(), rng);
        double epoch_loss = 0.0;
        for (std::size_t begin = 0; begin < usable.size();
             begin += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end =
                std::min(usable.size(), begin + static_cast<std::size_t>(cfg.batch_size));
            std::vector<TrainingSample> batch;
            batch.reserve(end - begin);
            for (std::size_t i = begin; i < end; ++i) {
                batch.push_back(augment(dataset[usable[i]], cfg.window, cfg.augment, rng));
            }
            const double scale = 1.0 / static_cast<double>(batch.size());
            const std::size_t per_chunk = (batch.size() + kGradientChunks - 1) / kGradientChunks;
            parallel_for(kGradientChunks, [&](std::size_t c) {
                ModelGradients& g = chunk_grads[c];
                g.for_each_tensor([](const std::string&, Matrix& t) { t.setZero(); });
                chunk_loss[c] = 0.0;
                for (std::size_t s = c * per_chunk; s < std::min(batch.size(), (c + 1) * per_chunk); ++s) {
                    chunk_loss[c] += accumulate_sample_gradient(batch[s], params, cfg.loss, scale, g).loss;
                }
            });
            total.for_each_tensor([](const std::string&, Matrix& t) { t.setZero(); });
            double batch_loss = 0.0;
            for (std::size_t c = 0; c < kGradientChunks; ++c) {
                add_scaled(total, chunk_grads[c], 1.0);
                batch_loss += chunk_loss[c];
            }
            if (!std::isfinite(batch_loss) || !total.all_finite()) {
                std::ostringstream msg;
                msg << "training diverged at epoch " << epoch << ", optimizer step "
                    << opt.steps() + 1 << " (batch loss " << batch_loss << ")";
                throw TrainingDiverged(msg.str());
            }
            opt.step(params, total);
            epoch_loss += batch_loss;
        }
        EpochStats stats;
        stats.epoch = epoch;
        stats.mean_loss = epoch_loss / static_cast<double>(usable.size());
        stats.ade_val = mean_displacement_error(
            hooks.validation, [&](const TrackletWindow& w) { return predict(w, params).box; });
        result.curve.push_back(stats);
        if (hooks.on_epoch) hooks.on_epoch(stats, params);
        const bool better = !hooks.keep_best || result.selected_epoch == 0 ||
                            stats.ade_val < result.curve[result.selected_epoch - 1].ade_val;
        if (better) {
            result.selected_epoch = epoch;
            if (hooks.keep_best) result.params = params;
        }
    }
    if (!hooks.keep_best || hooks.validation.empty()) {
        result.params = std::move(params);
        result.selected_epoch = cfg.epochs;
    }
    return result;
}

void write_training_log(const std::string& path, const std::vector<EpochStats>& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write training log: " + path);
    out << "epoch,mean_loss,ade_val\n" << std::setprecision(10);
    for (const auto& s : curve) out << s.epoch << ',' << s.mean_loss << ',' << s.ade_val << '\n';
}

}  // namespace playtrack
