#include <gtest/gtest.h>

#include <random>
#include <set>

#include "playtrack/association.hpp"

using namespace playtrack;

namespace {

AppearanceEmbedding vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double d : v) x(i++) = d;
    return AppearanceEmbedding(x);
}

Detection det(BoundingBox b, double score, std::optional<AppearanceEmbedding> e = std::nullopt) {
    return {b, score, std::move(e)};
}

}  // namespace

TEST(AssociationConfig, BufferOrdering) {
    AssociationConfig cfg;
    EXPECT_NO_THROW(cfg.validate());
    cfg.b2 = cfg.b1;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg.b1 = 0.0;
    cfg.b2 = 0.0;
    EXPECT_NO_THROW(cfg.validate());
    cfg.b1 = 1.2;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(AssociationConfig, RejectsBadThresholdsAndWeights) {
    AssociationConfig cfg;
    cfg.low_conf_thresh = 0.8;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
    cfg = {};
    cfg.lambda_reid = 0.0;
    cfg.lambda_ssim = 0.0;
    EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(HybridCost, Examples) {
    AssociationConfig cfg;
    const auto e = vec({1.0, 0.0});
    std::vector<TrackCandidate> tracks{{{0, 0, 10, 10}, &e}};
    std::vector<Detection> dets{det({0, 0, 10, 10}, 0.9, vec({1.0, 0.0}))};
    EXPECT_NEAR(hybrid_cost(tracks, dets, {0}, cfg).at(0, 0), 0.0, 1e-12);

    cfg.metric = SimilarityMetric::kIoU;
    dets = {det({0, 0, 10, 6}, 0.9, vec({0.8, 0.6}))};
    EXPECT_NEAR(hybrid_cost(tracks, dets, {0}, cfg).at(0, 0), 0.5 * 0.2 + 0.5 * 0.4, 1e-12);

    cfg.lambda_reid = 0.0;
    cfg.lambda_ssim = 0.7;
    EXPECT_NEAR(hybrid_cost(tracks, dets, {0}, cfg).at(0, 0), 0.7 * 0.4, 1e-12);
}

TEST(HybridCost, MissingEmbeddingFallsBackToSpatial) {
    AssociationConfig cfg;
    cfg.metric = SimilarityMetric::kIoU;
    std::vector<TrackCandidate> tracks{{{0, 0, 10, 10}, nullptr}};
    std::vector<Detection> dets{det({0, 0, 10, 6}, 0.9, vec({1.0, 0.0}))};
    EXPECT_NEAR(hybrid_cost(tracks, dets, {0}, cfg).at(0, 0), 0.4, 1e-12);
}

TEST(HybridCost, GatesSpatiallyImpossiblePairs) {
    AssociationConfig cfg;
    const auto e = vec({1.0, 0.0});
    std::vector<TrackCandidate> tracks{{{0, 0, 10, 10}, &e}};
    std::vector<Detection> dets{det({500, 500, 10, 10}, 0.9, vec({1.0, 0.0}))};
    EXPECT_TRUE(hybrid_cost(tracks, dets, {0}, cfg).gated(0, 0));
    EXPECT_TRUE(associate_frame(tracks, dets, cfg).matches.empty());
}

TEST(HybridCost, EmptyInputsGiveEmptyMatrix) {
    AssociationConfig cfg;
    EXPECT_TRUE(hybrid_cost({}, {}, {}, cfg).empty());
    EXPECT_TRUE(spatial_cost({}, {}, {}, cfg, 0.3).empty());
}

TEST(AssociateFrame, HighConfidenceMatchesInFirstStage) {
    AssociationConfig cfg;
    const auto e = vec({0.0, 1.0});
    std::vector<TrackCandidate> tracks{{{10, 10, 20, 40}, &e}};
    std::vector<Detection> dets{det({12, 11, 20, 40}, 0.95, vec({0.0, 1.0}))};
    const auto res = associate_frame(tracks, dets, cfg);
    ASSERT_EQ(res.matches.size(), 1u);
    EXPECT_EQ(res.matches[0].stage, MatchStage::kHighConfidence);
    EXPECT_TRUE(res.unmatched_tracks.empty());
}

TEST(AssociateFrame, LowConfidenceFallsThroughToSecondStage) {
    AssociationConfig cfg;
    std::vector<TrackCandidate> tracks{{{10, 10, 20, 40}, nullptr}};
    std::vector<Detection> dets{det({12, 11, 20, 40}, 0.3)};
    const auto res = associate_frame(tracks, dets, cfg);
    ASSERT_EQ(res.matches.size(), 1u);
    EXPECT_EQ(res.matches[0].stage, MatchStage::kLowConfidence);
}

TEST(AssociateFrame, UnmatchedLowConfidenceIsDropped) {
    AssociationConfig cfg;
    std::vector<Detection> dets{det({12, 11, 20, 40}, 0.3), det({0, 0, 5, 5}, 0.05),
                                det({300, 300, 20, 40}, 0.9)};
    const auto res = associate_frame({}, dets, cfg);
    EXPECT_EQ(res.unmatched_low, (std::vector<std::size_t>{0}));
    EXPECT_EQ(res.discarded, (std::vector<std::size_t>{1}));
    EXPECT_EQ(res.unmatched_high, (std::vector<std::size_t>{2}));
}

TEST(AssociateFrame, RandomScenesRespectStageInvariants) {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> pos(0, 200), conf(0, 1);
    AssociationConfig cfg;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<BoundingBox> track_boxes;
        std::vector<TrackCandidate> tracks;
        for (int i = 0; i < 6; ++i) track_boxes.push_back({pos(rng), pos(rng), 20, 50});
        for (const auto& b : track_boxes) tracks.push_back({b, nullptr});
        std::vector<Detection> dets;
        for (int j = 0; j < 7; ++j) dets.push_back(det({pos(rng), pos(rng), 20, 50}, conf(rng)));

        const auto res = associate_frame(tracks, dets, cfg);
        std::set<std::size_t> seen_tracks, seen_dets;
        for (const auto& m : res.matches) {
            EXPECT_TRUE(seen_tracks.insert(m.track).second);
            EXPECT_TRUE(seen_dets.insert(m.detection).second);
            const double s = dets[m.detection].score;
            if (m.stage == MatchStage::kHighConfidence) {
                EXPECT_GE(s, cfg.high_conf_thresh);
            } else {
                EXPECT_LT(s, cfg.high_conf_thresh);
                EXPECT_GE(s, cfg.low_conf_thresh);
            }
        }
        EXPECT_EQ(seen_tracks.size() + res.unmatched_tracks.size(), tracks.size());
        EXPECT_EQ(seen_dets.size() + res.unmatched_high.size() + res.unmatched_low.size() +
                      res.discarded.size(),
                  dets.size());
    }
}

TEST(AssociateFrame, SecondStageIgnoresAppearance) {
    AssociationConfig cfg;
    const auto a = vec({1.0, 0.0});
    std::vector<TrackCandidate> tracks{{{10, 10, 20, 40}, &a}};
    // Opposite embedding on a low-confidence detection must not block the match.
    std::vector<Detection> dets{det({12, 11, 20, 40}, 0.3, vec({-1.0, 0.0}))};
    const auto cost = spatial_cost(tracks, dets, {0}, cfg, cfg.b2);
    EXPECT_NEAR(cost.at(0, 0), 1.0 - ha_eiou(tracks[0].predicted, dets[0].box, cfg.b2), 1e-12);
    EXPECT_EQ(associate_frame(tracks, dets, cfg).matches.size(), 1u);
}
