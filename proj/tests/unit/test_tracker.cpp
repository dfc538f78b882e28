#include <gtest/gtest.h>

#include <sstream>

#include "playtrack/metrics.hpp"
#include "playtrack/simulator.hpp"
#include "playtrack/tracker.hpp"

using namespace playtrack;

namespace {

Scenario busy_scenario() {
    Scenario s;
    s.n_agents = 12;
    s.n_frames = 200;
    s.seed = 3;
    s.noise_sigma = 2.0;
    s.occlusion_rate = 0.5;
    s.miss_rate = 0.05;
    s.embedding_dim = 32;
    s.team_similarity = 0.5;
    s.embedding_noise = {0.2, 0.8, 0.0};
    return s;
}

std::string formatted(const LabeledFrames& r) {
    std::ostringstream out;
    format_results(out, r);
    return out.str();
}

}  // namespace

TEST(RunSequence, CleanScenarioIsIdentityPerfect) {
    for (auto profile : {MotionProfile::kLinear, MotionProfile::kCurved, MotionProfile::kSprintAndCut}) {
        Scenario s;
        s.n_agents = 10;
        s.n_frames = 200;
        s.profile = profile;
        s.seed = 8;
        const auto sim = generate(s);
        for (auto metric : {SimilarityMetric::kIoU, SimilarityMetric::kEIoU, SimilarityMetric::kHIoU,
                            SimilarityMetric::kHAEIoU}) {
            AssociationConfig acfg;
            acfg.metric = metric;
            const auto run = run_sequence(sim.sequence, TrackerConfig{}, acfg);
            const auto r = evaluate(*sim.sequence.gt, run.results);
            EXPECT_EQ(r.idsw, 0) << to_string(profile) << " " << to_string(metric);
            EXPECT_EQ(r.mota, 1.0) << to_string(profile) << " " << to_string(metric);
        }
    }
}

TEST(RunSequence, DeterministicResults) {
    const auto sim = generate(busy_scenario());
    const auto a = run_sequence(sim.sequence, TrackerConfig{}, AssociationConfig{});
    const auto b = run_sequence(sim.sequence, TrackerConfig{}, AssociationConfig{});
    EXPECT_EQ(formatted(a.results), formatted(b.results));
    EXPECT_EQ(a.frames, 200);
    EXPECT_GT(a.fps(), 0.0);
}

TEST(RunSequence, MetricVariantsDiffer) {
    const auto sim = generate(busy_scenario());
    AssociationConfig iou_cfg, ha_cfg;
    iou_cfg.metric = SimilarityMetric::kIoU;
    ha_cfg.metric = SimilarityMetric::kHAEIoU;
    const auto a = run_sequence(sim.sequence, TrackerConfig{}, iou_cfg);
    const auto b = run_sequence(sim.sequence, TrackerConfig{}, ha_cfg);
    EXPECT_NE(formatted(a.results), formatted(b.results));
}

TEST(RunSequence, OutputBoxesAreDetections) {
    const auto sim = generate(busy_scenario());
    const auto run = run_sequence(sim.sequence, TrackerConfig{}, AssociationConfig{});
    for (const auto& [f, rows] : run.results) {
        const auto& dets = sim.sequence.frames.at(f);
        for (const auto& r : rows) {
            EXPECT_TRUE(std::any_of(dets.begin(), dets.end(), [&](const Detection& d) { return d.box == r.box; }));
        }
    }
}

TEST(ConstantVelocityPredictor, ExtrapolatesPixels) {
    const ConstantVelocityPredictor p;
    const std::vector<HistoryEntry> h{{1, {10, 20, 30, 40}}, {2, {14, 18, 30, 40}}};
    EXPECT_EQ(p.predict(h, 1280, 720), (BoundingBox{18, 16, 30, 40}));
    EXPECT_EQ(p.predict(std::span(h).first(1), 1280, 720), h[0].box);
}

TEST(LearnedPredictor, ShortHistoryReturnsLastBox) {
    ModelConfig cfg;
    cfg.blocks = 1;
    cfg.d_model = 8;
    cfg.heads = 2;
    cfg.d_ff = 16;
    const LearnedPredictor p(ModelParams::initialize(cfg, 1));
    const std::vector<HistoryEntry> h{{1, {10, 20, 30, 40}}};
    EXPECT_EQ(p.predict(h, 1280, 720), h[0].box);
    const std::vector<HistoryEntry> h2{{1, {10, 20, 30, 40}}, {2, {12, 20, 30, 40}}};
    const auto out = p.predict(h2, 1280, 720);
    EXPECT_GT(out.x, 0.0);
    EXPECT_LT(out.x2(), 1280.0);
}
