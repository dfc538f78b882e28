#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "playtrack/config.hpp"
#include "playtrack/metrics.hpp"
#include "playtrack/predictor.hpp"

namespace playtrack {

/// One swept configuration key ("section.key") and its values.
struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

/// Parses "section.key=v1,v2,...".
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepCell {
    std::vector<std::pair<std::string, std::string>> settings;  ///< the grid values of this cell
    bool valid = true;
    std::string error;  ///< why the cell was skipped when !valid
    std::vector<EvalReport> per_seed;
    EvalReport combined;
    double median_idf1 = 0.0;
    double median_hota = 0.0;
};

/// Builds the predictor for a cell's configuration; null means constant velocity.
using PredictorFactory = std::function<std::shared_ptr<const MotionPredictor>(const RunConfig&)>;

/// Simulates the configured scenario with the given seed, tracks it and scores it.
EvalReport evaluate_scenario(const RunConfig& cfg, std::uint64_t seed,
                             std::shared_ptr<const MotionPredictor> predictor);

/// Cartesian product of the axes in row-major order (last axis fastest). Cells whose
/// configuration fails validation are reported with valid = false instead of being dropped.
/// Cells and seeds run on `workers` threads; results do not depend on the worker count.
std::vector<SweepCell> run_sweep(const RunConfig& base, const std::vector<SweepAxis>& grid,
                                 const std::vector<std::uint64_t>& seeds,
                                 const PredictorFactory& factory, std::size_t workers);

/// CSV: one row per cell with the grid values, a status column and the combined metrics.
void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& grid,
                     const std::vector<SweepCell>& cells);

}  // namespace playtrack
