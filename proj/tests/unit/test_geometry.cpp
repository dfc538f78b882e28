#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "playtrack/geometry.hpp"

using namespace playtrack;

namespace {

BoundingBox random_int_box(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pos(0, 40), size(1, 25);
    return {static_cast<double>(pos(rng)), static_cast<double>(pos(rng)),
            static_cast<double>(size(rng)), static_cast<double>(size(rng))};
}

BoundingBox random_box(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> pos(0.0, 100.0), size(1.0, 60.0);
    return {pos(rng), pos(rng), size(rng), size(rng)};
}

}  // namespace

TEST(Iou, Examples) {
    EXPECT_DOUBLE_EQ(iou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
    EXPECT_NEAR(iou({0, 0, 10, 10}, {5, 0, 10, 10}), 50.0 / 150.0, 1e-12);
    EXPECT_EQ(iou({0, 0, 10, 10}, {20, 20, 5, 5}), 0.0);
}

TEST(Iou, DegenerateBoxesScoreZero) {
    EXPECT_EQ(iou({0, 0, 0, 10}, {0, 0, 10, 10}), 0.0);
    EXPECT_EQ(iou({0, 0, 10, 0}, {0, 0, 10, 0}), 0.0);
}

TEST(Expand, Examples) {
    EXPECT_EQ(expand({0, 0, 10, 10}, 0.0), (BoundingBox{0, 0, 10, 10}));
    EXPECT_EQ(expand({0, 0, 10, 10}, 0.4), (BoundingBox{-2, -2, 14, 14}));
    const auto e = expand({5, 5, 2, 4}, 0.5);
    EXPECT_DOUBLE_EQ(e.x, 4.5);
    EXPECT_DOUBLE_EQ(e.y, 4.0);
    EXPECT_DOUBLE_EQ(e.w, 3.0);
    EXPECT_DOUBLE_EQ(e.h, 6.0);
}

TEST(Expand, RejectsBufferOutsideUnitInterval) {
    EXPECT_THROW(expand({0, 0, 1, 1}, -0.1), std::invalid_argument);
    EXPECT_THROW(expand({0, 0, 1, 1}, 1.5), std::invalid_argument);
}

TEST(Eiou, Examples) {
    EXPECT_DOUBLE_EQ(eiou({3, 4, 10, 20}, {3, 4, 10, 20}, 0.3), 1.0);
    EXPECT_NEAR(eiou({0, 0, 10, 10}, {5, 0, 10, 10}, 0.4), 126.0 / 266.0, 1e-12);
}

TEST(Eiou, ZeroBufferEqualsIouExactly) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 500; ++i) {
        const auto a = random_box(rng), b = random_box(rng);
        EXPECT_EQ(eiou(a, b, 0.0), iou(a, b));
    }
}

TEST(Eiou, ExpansionCreatesOverlapForNearbyDisjointBoxes) {
    const BoundingBox a{0, 0, 10, 10}, b{11, 0, 10, 10};
    EXPECT_EQ(iou(a, b), 0.0);
    EXPECT_GT(eiou(a, b, 0.4), 0.0);
}

TEST(Hiou, Examples) {
    EXPECT_DOUBLE_EQ(hiou({0, 0, 10, 10}, {0, 0, 10, 10}), 1.0);
    EXPECT_NEAR(hiou({0, 0, 5, 10}, {3, 4, 5, 10}), 6.0 / 14.0, 1e-12);
    EXPECT_EQ(hiou({0, 0, 5, 10}, {0, 20, 5, 10}), 0.0);
}

TEST(Hiou, AbsoluteNumeratorRewardsVerticalGap) {
    EXPECT_NEAR(hiou({0, 0, 5, 10}, {0, 20, 5, 10}, true), 10.0 / 30.0, 1e-12);
}

TEST(HaEiou, Examples) {
    EXPECT_DOUBLE_EQ(ha_eiou({1, 2, 10, 30}, {1, 2, 10, 30}, 0.4), 1.0);
    EXPECT_EQ(ha_eiou({0, 0, 10, 10}, {0, 50, 10, 10}, 0.4), 0.0);
    const double expected = (6.0 / 14.0) * (6.0 / 14.0);
    EXPECT_NEAR(ha_eiou({0, 0, 10, 10}, {0, 4, 10, 10}, 0.0), expected, 1e-12);
    const auto r1 = oracle::raster_overlap({0, 0, 10, 10}, {0, 4, 10, 10});
    EXPECT_NEAR(r1.ratio() * r1.ratio(), expected, 1e-12);
}

TEST(HaEiou, FactorizesBitExactly) {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_box(rng), b = random_box(rng);
        for (double buf : {0.0, 0.25, 0.4}) {
            EXPECT_EQ(ha_eiou(a, b, buf), hiou(a, b) * eiou(a, b, buf));
        }
    }
}

TEST(HaEiou, HeightFromExpandedBoxesWhenConfigured) {
    GeometryOptions opts;
    opts.hiou_on_expanded = true;
    const BoundingBox a{0, 0, 10, 10}, b{0, 4, 10, 10};
    EXPECT_EQ(ha_eiou(a, b, 0.4, opts), hiou(expand(a, 0.4), expand(b, 0.4)) * eiou(a, b, 0.4));
}

TEST(Similarity, DispatchesEachMetric) {
    const BoundingBox a{0, 0, 10, 20}, b{3, 5, 10, 20};
    EXPECT_EQ(similarity(SimilarityMetric::kIoU, a, b, 0.4), iou(a, b));
    EXPECT_EQ(similarity(SimilarityMetric::kEIoU, a, b, 0.4), eiou(a, b, 0.4));
    EXPECT_EQ(similarity(SimilarityMetric::kHIoU, a, b, 0.4), hiou(a, b) * iou(a, b));
    EXPECT_EQ(similarity(SimilarityMetric::kHAEIoU, a, b, 0.4), ha_eiou(a, b, 0.4));
}

TEST(Similarity, MetricNamesRoundTrip) {
    for (auto m : {SimilarityMetric::kIoU, SimilarityMetric::kEIoU, SimilarityMetric::kHIoU,
                   SimilarityMetric::kHAEIoU}) {
        EXPECT_EQ(parse_metric(to_string(m)), m);
    }
    EXPECT_EQ(parse_metric("HA_EIoU"), SimilarityMetric::kHAEIoU);
    EXPECT_THROW(parse_metric("giou"), std::invalid_argument);
}

TEST(GeometryOracle, MatchesRasterGrid) {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_int_box(rng), b = random_int_box(rng);
        EXPECT_NEAR(iou(a, b), oracle::raster_overlap(a, b).ratio(), 1e-3);
        EXPECT_NEAR(eiou(a, b, 0.4), oracle::raster_overlap(expand(a, 0.4), expand(b, 0.4), 5).ratio(),
                    1e-3);
    }
}

TEST(GeometryProperties, SymmetricAndInUnitRange) {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_box(rng), b = random_box(rng);
        for (auto m : {SimilarityMetric::kIoU, SimilarityMetric::kEIoU, SimilarityMetric::kHIoU,
                       SimilarityMetric::kHAEIoU}) {
            const double ab = similarity(m, a, b, 0.35), ba = similarity(m, b, a, 0.35);
            EXPECT_DOUBLE_EQ(ab, ba) << to_string(m);
            EXPECT_GE(ab, 0.0);
            EXPECT_LE(ab, 1.0);
        }
        EXPECT_DOUBLE_EQ(hiou(a, b), hiou(b, a));
    }
}

TEST(GeometryProperties, TranslationInvariant) {
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<int> shift(-50, 50);
    for (int i = 0; i < 300; ++i) {
        const auto a = random_int_box(rng), b = random_int_box(rng);
        const double dx = shift(rng), dy = shift(rng);
        const BoundingBox ta{a.x + dx, a.y + dy, a.w, a.h}, tb{b.x + dx, b.y + dy, b.w, b.h};
        EXPECT_NEAR(iou(a, b), iou(ta, tb), 1e-12);
        EXPECT_NEAR(eiou(a, b, 0.3), eiou(ta, tb, 0.3), 1e-12);
        EXPECT_NEAR(hiou(a, b), hiou(ta, tb), 1e-12);
        EXPECT_NEAR(ha_eiou(a, b, 0.3), ha_eiou(ta, tb, 0.3), 1e-12);
    }
}

TEST(Ciou, Examples) {
    EXPECT_NEAR(ciou_loss({0, 0, 10, 10}, {0, 0, 10, 10}), 0.0, 1e-15);
    EXPECT_GT(ciou_loss({0, 0, 10, 10}, {10, 0, 10, 10}), 1.0);
}

TEST(Ciou, MatchesReferenceAndIsNonNegative) {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 1000; ++i) {
        const auto p = random_box(rng), g = random_box(rng);
        const double loss = ciou_loss(p, g);
        EXPECT_NEAR(loss, oracle::ciou_reference(p, g), 1e-9);
        EXPECT_GE(loss, 0.0);
    }
}

TEST(Ciou, GradientMatchesFiniteDifferences) {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 200; ++i) {
        const auto p = random_box(rng), g = random_box(rng);
        const auto r = ciou_loss_with_grad(p, g);
        EXPECT_DOUBLE_EQ(r.loss, ciou_loss(p, g));
        for (int k = 0; k < 4; ++k) {
            auto hi = p.as_array(), lo = p.as_array();
            const double h = 1e-6;
            hi[k] += h;
            lo[k] -= h;
            const double fd = (ciou_loss(BoundingBox::from_array(hi), g) -
                               ciou_loss(BoundingBox::from_array(lo), g)) / (2 * h);
            EXPECT_NEAR(r.grad[k], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        }
    }
}
