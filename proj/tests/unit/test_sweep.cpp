#include <gtest/gtest.h>

#include <sstream>

#include "playtrack/sweep.hpp"

using namespace playtrack;

namespace {

RunConfig small_run() {
    RunConfig cfg;
    cfg.simulator.n_agents = 6;
    cfg.simulator.n_frames = 60;
    cfg.simulator.noise_sigma = 1.0;
    cfg.simulator.embedding_dim = 16;
    return cfg;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

PredictorFactory constant_velocity() {
    return [](const RunConfig&) { return std::shared_ptr<const MotionPredictor>(); };
}

}  // namespace

TEST(SweepAxis, Parses) {
    const auto a = parse_sweep_axis("association.b1=0.25,0.3, 0.35");
    EXPECT_EQ(a.key, "association.b1");
    EXPECT_EQ(a.values, (std::vector<std::string>{"0.25", "0.3", "0.35"}));
    EXPECT_THROW(parse_sweep_axis("association.b1"), UsageError);
    EXPECT_THROW(parse_sweep_axis("association.b1="), UsageError);
}

TEST(Sweep, SingleCellGivesOneRow) {
    const std::vector<SweepAxis> grid{parse_sweep_axis("association.metric=iou")};
    const auto cells = run_sweep(small_run(), grid, {1}, constant_velocity(), 1);
    ASSERT_EQ(cells.size(), 1u);
    EXPECT_TRUE(cells[0].valid);
    std::ostringstream csv;
    write_sweep_csv(csv, grid, cells);
    const auto rows = lines(csv.str());
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].rfind("iou,ok", 0), 0u) << rows[1];
}

TEST(Sweep, BufferGridEmitsEveryCell) {
    const std::vector<SweepAxis> grid{parse_sweep_axis("association.b1=0.25,0.3,0.35,0.4"),
                                      parse_sweep_axis("association.b2=0.25,0.3,0.35,0.4,0.45")};
    RunConfig base = small_run();
    base.simulator.n_frames = 30;
    const auto cells = run_sweep(base, grid, {1}, constant_velocity(), 2);
    ASSERT_EQ(cells.size(), 20u);
    std::size_t valid = 0;
    for (const auto& c : cells) {
        const double b1 = std::stod(c.settings[0].second), b2 = std::stod(c.settings[1].second);
        EXPECT_EQ(c.valid, b2 < b1) << b1 << " " << b2;
        valid += c.valid;
    }
    EXPECT_EQ(valid, 6u);
    std::ostringstream csv;
    write_sweep_csv(csv, grid, cells);
    const auto rows = lines(csv.str());
    ASSERT_EQ(rows.size(), 21u);
    EXPECT_EQ(rows[1].rfind("0.25,0.25,", 0), 0u);
    EXPECT_NE(rows[1].find("skipped"), std::string::npos);
}

TEST(Sweep, IndependentOfWorkerCount) {
    const std::vector<SweepAxis> grid{parse_sweep_axis("association.metric=iou,ha-eiou")};
    const auto a = run_sweep(small_run(), grid, {1, 2}, constant_velocity(), 1);
    const auto b = run_sweep(small_run(), grid, {1, 2}, constant_velocity(), 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].combined.idtp, b[i].combined.idtp);
        EXPECT_EQ(a[i].combined.hota, b[i].combined.hota);
        EXPECT_EQ(a[i].median_idf1, b[i].median_idf1);
    }
}

TEST(Sweep, UnknownKeyIsUsageError) {
    const std::vector<SweepAxis> grid{parse_sweep_axis("association.nope=1")};
    EXPECT_THROW(run_sweep(small_run(), grid, {1}, constant_velocity(), 1), UsageError);
}
