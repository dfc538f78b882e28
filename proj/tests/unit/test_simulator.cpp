#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "playtrack/errors.hpp"
#include "playtrack/simulator.hpp"

using namespace playtrack;

namespace {

Scenario clean_scenario(MotionProfile profile) {
    Scenario s;
    s.n_agents = 8;
    s.n_frames = 120;
    s.profile = profile;
    s.seed = 5;
    s.embedding_dim = 16;
    return s;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Simulator, CleanDetectionsEqualGroundTruth) {
    for (auto profile : {MotionProfile::kLinear, MotionProfile::kCurved, MotionProfile::kSprintAndCut}) {
        const auto sim = generate(clean_scenario(profile));
        ASSERT_TRUE(sim.sequence.gt);
        const auto& gt = *sim.sequence.gt;
        ASSERT_EQ(gt.size(), 120u);
        for (const auto& [frame, rows] : gt) {
            const auto& dets = sim.sequence.frames.at(frame);
            const auto& ids = sim.detection_identity.at(frame);
            ASSERT_EQ(dets.size(), rows.size()) << to_string(profile) << " frame " << frame;
            for (std::size_t j = 0; j < dets.size(); ++j) {
                const auto it = std::find_if(rows.begin(), rows.end(),
                                             [&](const LabeledBox& g) { return g.id == ids[j]; });
                ASSERT_NE(it, rows.end());
                EXPECT_EQ(dets[j].box, it->box);
                EXPECT_EQ(dets[j].score, 1.0);
            }
        }
    }
}

TEST(Simulator, GroundTruthStaysInsideImage) {
    Scenario s = clean_scenario(MotionProfile::kSprintAndCut);
    s.n_agents = 20;
    s.n_frames = 400;
    s.noise_sigma = 2.0;
    s.occlusion_rate = 0.5;
    s.pan_amplitude = 2.0;
    const auto sim = generate(s);
    for (const auto& [frame, rows] : *sim.sequence.gt) {
        for (const auto& g : rows) {
            EXPECT_GE(g.box.x, 0.0);
            EXPECT_GE(g.box.y, 0.0);
            EXPECT_LE(g.box.x2(), s.image_width + 1e-9);
            EXPECT_LE(g.box.y2(), s.image_height + 1e-9);
        }
    }
}

TEST(Simulator, MissRateOneGivesNoDetections) {
    Scenario s = clean_scenario(MotionProfile::kLinear);
    s.miss_rate = 1.0;
    const auto sim = generate(s);
    std::size_t dets = 0;
    for (const auto& [f, rows] : sim.sequence.frames) dets += rows.size();
    EXPECT_EQ(dets, 0u);
    EXPECT_FALSE(sim.sequence.gt->empty());
}

TEST(Simulator, SameSeedWritesIdenticalFiles) {
    Scenario s = clean_scenario(MotionProfile::kSprintAndCut);
    s.noise_sigma = 1.5;
    s.occlusion_rate = 0.4;
    s.false_positive_rate = 0.5;
    s.embedding_noise = {0.1, 0.5, 0.0};
    const auto root = std::filesystem::temp_directory_path() / "playtrack_sim_det";
    std::filesystem::remove_all(root);
    write_simulation((root / "a").string(), generate(s));
    write_simulation((root / "b").string(), generate(s));
    for (const char* f : {"det/det.txt", "det/embeddings.csv", "gt/gt.txt", "seqinfo.ini", "identities.txt"}) {
        const auto a = slurp(root / "a" / f);
        EXPECT_FALSE(a.empty()) << f;
        EXPECT_EQ(a, slurp(root / "b" / f)) << f;
    }
    s.seed = 6;
    write_simulation((root / "c").string(), generate(s));
    EXPECT_NE(slurp(root / "a" / "gt/gt.txt"), slurp(root / "c" / "gt/gt.txt"));
    std::filesystem::remove_all(root);
}

TEST(Simulator, SidecarMapsEveryDetection) {
    Scenario s = clean_scenario(MotionProfile::kCurved);
    s.noise_sigma = 1.0;
    s.occlusion_rate = 0.6;
    s.false_positive_rate = 1.0;
    const auto sim = generate(s);
    std::size_t false_positives = 0;
    for (const auto& [frame, dets] : sim.sequence.frames) {
        const auto& ids = sim.detection_identity.at(frame);
        ASSERT_EQ(ids.size(), dets.size());
        for (int id : ids) {
            if (id < 0) {
                ++false_positives;
                continue;
            }
            const auto& gt = sim.sequence.gt->at(frame);
            EXPECT_TRUE(std::any_of(gt.begin(), gt.end(), [&](const LabeledBox& g) { return g.id == id; }));
        }
    }
    EXPECT_GT(false_positives, 0u);

    const auto dir = std::filesystem::temp_directory_path() / "playtrack_sim_sidecar";
    std::filesystem::remove_all(dir);
    write_simulation(dir.string(), sim);
    const auto back = load_simulation(dir.string());
    EXPECT_EQ(back.detection_identity, sim.detection_identity);
    std::filesystem::remove(dir / "identities.txt");
    EXPECT_THROW(load_simulation(dir.string()), DataError);
    std::filesystem::remove_all(dir);
}

TEST(Simulator, OcclusionLowersConfidenceAndDropsBoxes) {
    Scenario s = clean_scenario(MotionProfile::kSprintAndCut);
    s.n_agents = 20;
    s.n_frames = 300;
    const auto clean = generate(s);
    s.occlusion_rate = 1.0;
    const auto occluded = generate(s);
    std::size_t n_clean = 0, n_occ = 0, low_conf = 0;
    for (const auto& [f, d] : clean.sequence.frames) n_clean += d.size();
    for (const auto& [f, d] : occluded.sequence.frames) {
        n_occ += d.size();
        for (const auto& det : d) low_conf += det.score < 0.9;
    }
    EXPECT_LT(n_occ, n_clean);
    EXPECT_GT(low_conf, 0u);
}

TEST(Simulator, ProfilesParse) {
    EXPECT_EQ(parse_motion_profile("sprint-and-cut"), MotionProfile::kSprintAndCut);
    EXPECT_EQ(parse_motion_profile(to_string(MotionProfile::kCurved)), MotionProfile::kCurved);
    EXPECT_THROW(parse_motion_profile("teleport"), std::invalid_argument);
}

TEST(Simulator, ValidatesScenario) {
    Scenario s;
    s.miss_rate = 1.5;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = {};
    s.n_agents = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Simulator, TrackletsAreNormalizedChunks) {
    Scenario s = clean_scenario(MotionProfile::kLinear);
    const auto sim = generate(s);
    const auto tracklets = extract_tracklets(sim, 20, 10);
    ASSERT_FALSE(tracklets.empty());
    // 8 agents visible for 120 frames: (120 - 20) / 10 + 1 = 11 chunks each
    EXPECT_EQ(tracklets.size(), 8u * 11u);
    for (const auto& t : tracklets) {
        ASSERT_EQ(t.inputs.size(), 20u);
        EXPECT_EQ(t.inputs, t.targets);
        EXPECT_EQ(t.image_width, s.image_width);
        for (const auto& b : t.inputs) {
            EXPECT_GE(b.x, 0.0);
            EXPECT_LE(b.x2(), 1.0 + 1e-12);
        }
    }
    const auto many = simulate_tracklets(s, 100, 3, 20, 10);
    EXPECT_EQ(many.size(), 3u * 8u * 11u);
}

TEST(VisiblePart, CutsSideCoveredOverFullHeight) {
    const BoundingBox far{100, 100, 20, 50};
    const BoundingBox occluder{90, 90, 20, 80};  // covers x in [90, 110] over the whole height
    EXPECT_EQ(visible_part(far, occluder), (BoundingBox{110, 100, 10, 50}));
    EXPECT_EQ(visible_part(far, BoundingBox{115, 80, 30, 90}), (BoundingBox{100, 100, 15, 50}));
}

TEST(VisiblePart, CutsBottomCoveredOverFullWidth) {
    const BoundingBox far{100, 100, 20, 50};
    EXPECT_EQ(visible_part(far, BoundingBox{95, 130, 40, 100}), (BoundingBox{100, 100, 20, 30}));
}

TEST(VisiblePart, PartialBandKeepsExtremes) {
    // The occluder overlaps the left side but only the lower rows, so the top-left corner stays visible.
    const BoundingBox far{100, 100, 20, 50};
    EXPECT_EQ(visible_part(far, BoundingBox{90, 130, 25, 60}), far);
    EXPECT_EQ(visible_part(far, BoundingBox{105, 110, 5, 10}), far);
}

TEST(VisiblePart, FullCoverReturnsOriginal) {
    const BoundingBox far{100, 100, 20, 50};
    EXPECT_EQ(visible_part(far, BoundingBox{0, 0, 500, 500}), far);
}
