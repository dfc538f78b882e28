#include "playtrack/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "playtrack/parallel.hpp"
#include "playtrack/simulator.hpp"
#include "playtrack/tracker.hpp"

namespace playtrack {

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace

SweepAxis parse_sweep_axis(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("sweep axis must look like section.key=v1,v2: '" + text + "'");
    SweepAxis axis;
    axis.key = text.substr(0, eq);
    std::stringstream values(text.substr(eq + 1));
    std::string v;
    while (std::getline(values, v, ',')) {
        const auto b = v.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        axis.values.push_back(v.substr(b, v.find_last_not_of(" \t") - b + 1));
    }
    if (axis.values.empty()) throw UsageError("sweep axis '" + axis.key + "' has no values");
    return axis;
}

EvalReport evaluate_scenario(const RunConfig& cfg, std::uint64_t seed,
                             std::shared_ptr<const MotionPredictor> predictor) {
    Scenario scenario = cfg.simulator;
    scenario.seed = seed;
    const SimulatedSequence sim = generate(scenario);
    const TrackingRun run = run_sequence(sim.sequence, cfg.tracker, cfg.association, std::move(predictor));
    return evaluate(*sim.sequence.gt, run.results, 0.5, sim.sequence.name);
}

std::vector<SweepCell> run_sweep(const RunConfig& base, const std::vector<SweepAxis>& grid,
                                 const std::vector<std::uint64_t>& seeds,
                                 const PredictorFactory& factory, std::size_t workers) {
    if (seeds.empty()) throw UsageError("sweep needs at least one seed");
    std::size_t total = 1;
    for (const auto& axis : grid) total *= axis.values.size();

    std::vector<SweepCell> cells(total);
    std::vector<RunConfig> configs(total, base);
    for (std::size_t c = 0; c < total; ++c) {
        std::size_t rest = c;
        for (std::size_t a = grid.size(); a-- > 0;) {
            const auto& axis = grid[a];
            const std::string& value = axis.values[rest % axis.values.size()];
            rest /= axis.values.size();
            cells[c].settings.insert(cells[c].settings.begin(), {axis.key, value});
        }
        // Unknown keys and unparsable values are errors of the whole grid, not of one cell.
        for (const auto& [k, v] : cells[c].settings) set_config_value(configs[c], k, v);
        try {
            configs[c].validate();
        } catch (const UsageError& e) {
            cells[c].valid = false;
            cells[c].error = e.what();
        }
    }

    // Predictors are built once per valid cell, then every (cell, seed) pair runs independently.
    std::vector<std::shared_ptr<const MotionPredictor>> predictors(total);
    parallel_for(total, [&](std::size_t c) {
        if (cells[c].valid && factory) predictors[c] = factory(configs[c]);
    }, workers);

    std::vector<EvalReport> reports(total * seeds.size());
    parallel_for(total * seeds.size(), [&](std::size_t job) {
        const std::size_t c = job / seeds.size();
        if (!cells[c].valid) return;
        reports[job] = evaluate_scenario(configs[c], seeds[job % seeds.size()], predictors[c]);
    }, workers);

    for (std::size_t c = 0; c < total; ++c) {
        if (!cells[c].valid) continue;
        std::vector<double> idf1, hota;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            cells[c].per_seed.push_back(reports[c * seeds.size() + s]);
            idf1.push_back(cells[c].per_seed.back().idf1);
            hota.push_back(cells[c].per_seed.back().hota);
        }
        cells[c].combined = aggregate(cells[c].per_seed);
        cells[c].median_idf1 = median(idf1);
        cells[c].median_hota = median(hota);
    }
    return cells;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepAxis>& grid,
                     const std::vector<SweepCell>& cells) {
    for (const auto& axis : grid) out << axis.key << ',';
    out << "status,seeds,HOTA,DetA,AssA,MOTA,IDF1,IDSW,median_HOTA,median_IDF1\n";
    char buf[256];
    for (const auto& cell : cells) {
        for (const auto& [k, v] : cell.settings) out << v << ',';
        if (!cell.valid) {
            std::string reason = cell.error;
            std::replace(reason.begin(), reason.end(), ',', ';');
            std::replace(reason.begin(), reason.end(), '"', '\'');
            out << "\"skipped: " << reason << "\",0,,,,,,,,\n";
            continue;
        }
        const EvalReport& r = cell.combined;
        std::snprintf(buf, sizeof buf, "ok,%zu,%.6f,%.6f,%.6f,%.6f,%.6f,%ld,%.6f,%.6f",
                      cell.per_seed.size(), r.hota, r.deta, r.assa, r.mota, r.idf1, r.idsw,
                      cell.median_hota, cell.median_idf1);
        out << buf << '\n';
    }
}

}  // namespace playtrack
