#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "playtrack/checkpoint.hpp"
#include "playtrack/losses.hpp"
#include "playtrack/trainer.hpp"

using namespace playtrack;

namespace {

ModelConfig tiny_config() {
    ModelConfig cfg;
    cfg.blocks = 1;
    cfg.d_model = 16;
    cfg.d_state = 4;
    cfg.heads = 2;
    cfg.d_ff = 32;
    return cfg;
}

TrainingTracklet linear_tracklet(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> pos(0.2, 0.6), vel(-0.01, 0.01), size(0.03, 0.1);
    BoundingBox b{pos(rng), pos(rng), size(rng), size(rng)};
    const double vx = vel(rng), vy = vel(rng);
    TrainingTracklet t;
    for (std::size_t i = 0; i < n; ++i) {
        t.inputs.push_back(b);
        b.x += vx;
        b.y += vy;
    }
    t.targets = t.inputs;
    t.image_width = 1280;
    t.image_height = 720;
    return t;
}

AugmentConfig no_augmentation() {
    AugmentConfig a;
    a.p_temporal = a.p_scale = a.p_translate = a.p_noise = 0.0;
    return a;
}

}  // namespace

TEST(SmoothL1, Examples) {
    EXPECT_EQ(smooth_l1({0, 0, 0, 0}, {0, 0, 0, 0}), 0.0);
    EXPECT_DOUBLE_EQ(smooth_l1({0.5, 0, 0, 0}, {0, 0, 0, 0}), 0.125);
    EXPECT_DOUBLE_EQ(smooth_l1({0, 2.0, 0, 0}, {0, 0, 0, 0}), 1.5);
    EXPECT_DOUBLE_EQ(smooth_l1({0, 0, -2.0, 0}, {0, 0, 0, 0}), 1.5);
}

TEST(TotalLoss, TermsAndGradient) {
    const BoundingBox g{0.3, 0.4, 0.1, 0.2};
    EXPECT_NEAR(total_loss(g, g, LossWeights{}).loss, 0.0, 1e-12);
    const BoundingBox p{0.32, 0.37, 0.12, 0.18};
    EXPECT_NEAR(total_loss(p, g, {3.0, 0.0}).loss, 3.0 * smooth_l1(p.as_array(), g.as_array()), 1e-15);
    const auto r = total_loss(p, g, LossWeights{});
    EXPECT_NEAR(r.loss, 50.0 * smooth_l1(p.as_array(), g.as_array()) + ciou_loss(p, g), 1e-12);
    for (int k = 0; k < 4; ++k) {
        auto hi = p.as_array(), lo = p.as_array();
        hi[k] += 1e-7;
        lo[k] -= 1e-7;
        const double fd = (total_loss(BoundingBox::from_array(hi), g, {}).loss -
                           total_loss(BoundingBox::from_array(lo), g, {}).loss) / 2e-7;
        EXPECT_NEAR(r.grad[k], fd, 1e-5 * std::max(1.0, std::abs(fd)));
    }
}

TEST(Augment, DeterministicForSeed) {
    std::mt19937_64 src(71);
    const auto t = linear_tracklet(src, 20);
    std::mt19937_64 a(5), b(5);
    const auto sa = augment(t, 10, AugmentConfig{}, a), sb = augment(t, 10, AugmentConfig{}, b);
    EXPECT_EQ(sa.window.boxes, sb.window.boxes);
    EXPECT_EQ(sa.target, sb.target);
}

TEST(Augment, IdentityPathUsesRawSuffix) {
    std::mt19937_64 src(72);
    for (std::size_t n : {4u, 11u, 20u}) {
        const auto t = linear_tracklet(src, n);
        std::mt19937_64 rng(1);
        const auto s = augment(t, 10, no_augmentation(), rng);
        const std::size_t len = std::min<std::size_t>(n - 1, 10);
        EXPECT_EQ(s.window.valid_count(), len);
        EXPECT_EQ(s.target, t.targets[n - 1]);
        for (std::size_t i = 0; i < len; ++i) {
            EXPECT_EQ(s.window.boxes[10 - len + i], t.inputs[n - 1 - len + i]);
        }
    }
}

TEST(Augment, ScaleAppliedExactly) {
    std::mt19937_64 src(73);
    const auto t = linear_tracklet(src, 15);
    AugmentConfig cfg = no_augmentation();
    cfg.p_scale = 1.0;
    std::mt19937_64 rng(2);
    AugmentTrace trace;
    const auto s = augment(t, 10, cfg, rng, &trace);
    ASSERT_TRUE(trace.scaled);
    EXPECT_FALSE(trace.translated);
    for (std::size_t i = 0; i < 10; ++i) {
        const auto& raw = t.inputs[trace.start + i];
        const auto& out = s.window.boxes[i];
        EXPECT_EQ(out.x, raw.x * trace.scale);
        EXPECT_EQ(out.y, raw.y * trace.scale);
        EXPECT_EQ(out.w, raw.w * trace.scale);
        EXPECT_EQ(out.h, raw.h * trace.scale);
    }
    EXPECT_EQ(s.target.w, t.targets[trace.start + 10].w * trace.scale);
}

TEST(Augment, NeverMoreThanTwoTransformsAndNonNegativeExtent) {
    std::mt19937_64 src(74);
    const auto t = linear_tracklet(src, 12);
    AugmentConfig cfg;
    cfg.p_scale = cfg.p_translate = cfg.p_noise = 1.0;
    cfg.noise_sigma = 0.2;
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        AugmentTrace trace;
        const auto s = augment(t, 10, cfg, rng, &trace);
        EXPECT_LE(int(trace.scaled) + int(trace.translated) + int(trace.noised), 2);
        EXPECT_GE(trace.length, 2u);
        EXPECT_LE(trace.length, 10u);
        for (std::size_t k = 0; k < s.window.boxes.size(); ++k) {
            if (!s.window.mask[k]) continue;
            EXPECT_GE(s.window.boxes[k].w, 0.0);
            EXPECT_GE(s.window.boxes[k].h, 0.0);
        }
    }
}

TEST(Augment, RejectsShortTracklets) {
    std::mt19937_64 src(75), rng(1);
    EXPECT_THROW(augment(linear_tracklet(src, 2), 10, AugmentConfig{}, rng), std::invalid_argument);
}

TEST(ConstantVelocity, ExtrapolatesLastStep) {
    const auto w = TrackletWindow::from_history({{0.1, 0.2, 0.05, 0.1}, {0.12, 0.19, 0.05, 0.1}}, 10);
    const auto p = constant_velocity(w);
    EXPECT_NEAR(p.x, 0.14, 1e-15);
    EXPECT_NEAR(p.y, 0.18, 1e-15);
}

TEST(TrainConfig, Validation) {
    TrainConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.beta2 = 1.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.lr = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Train, WeightDecayIsDecoupled) {
    std::mt19937_64 src(76);
    std::vector<TrainingTracklet> data;
    for (int i = 0; i < 20; ++i) data.push_back(linear_tracklet(src, 12));
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.lr = 1e-2;
    cfg.weight_decay = 0.5;
    cfg.loss = {0.0, 0.0};
    cfg.augment = no_augmentation();
    const auto start = ModelParams::initialize(tiny_config(), 3);
    const auto out = train_from(start, data, cfg).params;
    const double factor = std::pow(1.0 - cfg.lr * cfg.weight_decay, 6.0);  // 3 batches x 2 epochs
    std::vector<const Matrix*> a;
    start.for_each_tensor([&](const std::string&, const Matrix& t) { a.push_back(&t); });
    std::size_t i = 0;
    out.for_each_tensor([&](const std::string&, const Matrix& t) {
        EXPECT_LE((t - factor * *a[i]).cwiseAbs().maxCoeff(), 1e-14);
        ++i;
    });
}

TEST(Train, LearnsConstantPosition) {
    std::mt19937_64 src(77);
    std::uniform_real_distribution<double> pos(0.2, 0.6), size(0.05, 0.1);
    std::vector<TrainingTracklet> data;
    for (int i = 0; i < 64; ++i) {
        const BoundingBox b{pos(src), pos(src), size(src), size(src)};
        data.push_back({std::vector<BoundingBox>(12, b), std::vector<BoundingBox>(12, b), 1, 1});
    }
    TrainConfig cfg;
    cfg.epochs = 60;
    cfg.batch_size = 16;
    cfg.lr = 1e-3;
    cfg.seed = 4;
    cfg.augment = no_augmentation();
    const auto params = train(data, tiny_config(), cfg).params;
    double total = 0.0;
    for (const auto& t : data) {
        const auto p = predict(TrackletWindow::from_history({t.inputs.begin(), t.inputs.end() - 1}, 10), params);
        total += smooth_l1(p.box.as_array(), t.targets.back().as_array());
    }
    EXPECT_LT(total / static_cast<double>(data.size()), 1e-3);
}

TEST(Train, ReproducibleAndReportsValidation) {
    std::mt19937_64 src(78);
    std::vector<TrainingTracklet> data;
    for (int i = 0; i < 40; ++i) data.push_back(linear_tracklet(src, 12));
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch_size = 8;
    cfg.seed = 9;
    TrainHooks hooks;
    hooks.validation = make_eval_samples(data, 10, 1);
    int calls = 0;
    hooks.on_epoch = [&](const EpochStats&, const ModelParams&) { ++calls; };
    const auto a = train(data, tiny_config(), cfg, hooks);
    const auto b = train(data, tiny_config(), cfg);
    EXPECT_EQ(calls, 2);
    ASSERT_EQ(a.curve.size(), 2u);
    EXPECT_EQ(a.curve.back().mean_loss, b.curve.back().mean_loss);
    EXPECT_TRUE(std::isfinite(a.curve.back().ade_val));
    EXPECT_TRUE(std::isnan(b.curve.back().ade_val));
    EXPECT_EQ(checkpoint_to_string(a.params), checkpoint_to_string(b.params));
}

TEST(Train, RejectsEmptyDataset) {
    EXPECT_THROW(train({}, tiny_config(), TrainConfig{}), std::invalid_argument);
}

TEST(Train, DivergenceIsReported) {
    std::mt19937_64 src(79);
    std::vector<TrainingTracklet> data{linear_tracklet(src, 12)};
    data[0].inputs[3].x = std::numeric_limits<double>::infinity();
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.augment = no_augmentation();
    EXPECT_ANY_THROW(train(data, tiny_config(), cfg));
}

TEST(Checkpoint, RoundTripsExactly) {
    const auto params = ModelParams::initialize(tiny_config(), 21);
    const auto path = (std::filesystem::temp_directory_path() / "playtrack_ckpt_test.json").string();
    save_checkpoint(path, params);
    const auto loaded = load_checkpoint(path);
    EXPECT_EQ(loaded.config, params.config);
    EXPECT_EQ(checkpoint_to_string(loaded), checkpoint_to_string(params));
    std::mt19937_64 src(80);
    const auto t = linear_tracklet(src, 10);
    const auto w = TrackletWindow::from_history(t.inputs, 10);
    EXPECT_EQ(predict(w, loaded).box, predict(w, params).box);
    std::filesystem::remove(path);
}

TEST(Checkpoint, RejectsCorruptInput) {
    EXPECT_ANY_THROW(checkpoint_from_string("{not json"));
    auto text = checkpoint_to_string(ModelParams::initialize(tiny_config(), 1));
    const auto pos = text.find("\"version\"");
    ASSERT_NE(pos, std::string::npos);
    const auto digit = text.find_first_of("0123456789", pos);
    text.replace(digit, 1, "99");
    EXPECT_ANY_THROW(checkpoint_from_string(text));
    EXPECT_ANY_THROW(load_checkpoint("/nonexistent/ckpt.json"));
}
