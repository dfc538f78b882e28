// playtrack command-line interface: simulate, train, track, eval, report, sweep.

#include <CLI11.hpp>

#include <cstdio>
#include <deque>
#include <span>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "playtrack/checkpoint.hpp"
#include "playtrack/config.hpp"
#include "playtrack/errors.hpp"
#include "playtrack/metrics.hpp"
#include "playtrack/mot_io.hpp"
#include "playtrack/parallel.hpp"
#include "playtrack/simulator.hpp"
#include "playtrack/sweep.hpp"
#include "playtrack/tracker.hpp"
#include "playtrack/trainer.hpp"
#include "svg_report.hpp"

namespace fs = std::filesystem;
using namespace playtrack;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

/// Shorthand flags that mirror configuration keys.
struct FlagAlias {
    const char* flag;
    const char* key;
};

constexpr FlagAlias kAssociationFlags[] = {
    {"--b1", "association.b1"},
    {"--b2", "association.b2"},
    {"--metric", "association.metric"},
    {"--lambda-reid", "association.lambda_reid"},
    {"--lambda-ssim", "association.lambda_ssim"},
    {"--high-thresh", "association.high_conf_thresh"},
    {"--low-thresh", "association.low_conf_thresh"},
    {"--gate", "association.gate_threshold"},
    {"--max-lost", "tracker.max_lost"},
    {"--min-hits", "tracker.min_hits"},
    {"--ema-alpha", "tracker.ema_alpha"},
    {"--ema-sigma", "tracker.ema_sigma"},
};

constexpr FlagAlias kModelFlags[] = {
    {"--blocks", "model.blocks"},
    {"--window", "model.window"},
    {"--epochs", "trainer.epochs"},
    {"--batch-size", "trainer.batch_size"},
    {"--lr", "trainer.lr"},
};

constexpr FlagAlias kSimulatorFlags[] = {
    {"--agents", "simulator.n_agents"},
    {"--frames", "simulator.n_frames"},
    {"--profile", "simulator.motion_profile"},
    {"--occlusion-rate", "simulator.occlusion_rate"},
    {"--noise", "simulator.noise_sigma"},
    {"--miss-rate", "simulator.miss_rate"},
    {"--seed", "simulator.seed"},
};

/// Config file, --set overrides and alias flags shared by the subcommands.
class ConfigOptions {
public:
    void attach(CLI::App* app, std::initializer_list<std::span<const FlagAlias>> groups) {
        app->add_option("-c,--config", path_, "INI configuration file");
        app->add_option("--set", sets_, "override a key: section.key=value (repeatable)");
        for (const auto group : groups) {
            for (const FlagAlias& a : group) {
                auto& slot = alias_values_.emplace_back(a.key, std::string());
                app->add_option(a.flag, slot.second, std::string("sets ") + a.key);
            }
        }
    }

    [[nodiscard]] RunConfig resolve() const {
        RunConfig cfg = path_.empty() ? RunConfig{} : load_config(path_);
        for (const auto& s : sets_) {
            const auto eq = s.find('=');
            if (eq == std::string::npos) throw UsageError("--set expects section.key=value, got '" + s + "'");
            set_config_value(cfg, s.substr(0, eq), s.substr(eq + 1));
        }
        for (const auto& [key, value] : alias_values_) {
            if (!value.empty()) set_config_value(cfg, key, value);
        }
        cfg.validate();
        return cfg;
    }

private:
    std::string path_;
    std::vector<std::string> sets_;
    std::deque<std::pair<std::string, std::string>> alias_values_;
};

std::shared_ptr<const MotionPredictor> load_predictor(const std::string& checkpoint) {
    if (checkpoint.empty()) return std::make_shared<ConstantVelocityPredictor>();
    return std::make_shared<LearnedPredictor>(load_checkpoint(checkpoint));
}

LabeledFrames load_gt(const std::string& path) {
    if (fs::is_directory(path)) return read_ground_truth((fs::path(path) / "gt" / "gt.txt").string());
    return read_ground_truth(path);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto dash = item.find('-');
        try {
            if (dash != std::string::npos && dash > 0) {
                const auto lo = std::stoull(item.substr(0, dash));
                const auto hi = std::stoull(item.substr(dash + 1));
                for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
            } else if (!item.empty()) {
                seeds.push_back(std::stoull(item));
            }
        } catch (const std::logic_error&) {
            throw UsageError("bad seed list '" + text + "'");
        }
    }
    if (seeds.empty()) throw UsageError("empty seed list");
    return seeds;
}

// ---------------------------------------------------------------------------

struct SimulateCmd {
    ConfigOptions cfg;
    std::string out;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("simulate", "generate a synthetic sequence directory");
        cfg.attach(app, {kSimulatorFlags});
        app->add_option("-o,--out", out, "output sequence directory")->required();
        app->callback([this] { run(); });
    }

    void run() const {
        const RunConfig c = cfg.resolve();
        const SimulatedSequence sim = generate(c.simulator);
        write_simulation(out, sim);
        std::size_t dets = 0;
        for (const auto& [f, d] : sim.sequence.frames) dets += d.size();
        std::cout << "wrote " << out << ": " << c.simulator.n_frames << " frames, "
                  << c.simulator.n_agents << " agents, " << dets << " detections\n";
    }
};

struct TrainCmd {
    ConfigOptions cfg;
    std::vector<std::string> data;
    int simulated = 0;
    int tracklet_length = 20;
    int stride = 10;
    int validation_sequences = 2;
    bool keep_best = false;
    std::string out, log;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("train", "train the motion predictor");
        cfg.attach(app, {kModelFlags, kSimulatorFlags});
        app->add_option("--data", data, "sequence directories with ground truth (repeatable)");
        app->add_option("--simulated", simulated, "generate this many training sequences from [simulator]");
        app->add_option("--tracklet-length", tracklet_length, "boxes per training tracklet");
        app->add_option("--stride", stride, "step between tracklet starts");
        app->add_option("--validation-sequences", validation_sequences,
                        "simulated held-out sequences for the per-epoch ADE");
        app->add_flag("--keep-best", keep_best, "save the epoch with the lowest validation ADE");
        app->add_option("-o,--out", out, "checkpoint to write")->required();
        app->add_option("--log", log, "training curve CSV (epoch,mean_loss,ade_val)");
        app->callback([this] { run(); });
    }

    [[nodiscard]] std::vector<TrainingTracklet> from_dirs() const {
        std::vector<TrainingTracklet> out_set;
        for (const auto& dir : data) {
            SimulatedSequence sim;
            if (fs::exists(fs::path(dir) / "identities.txt")) {
                sim = load_simulation(dir);
            } else {
                // Ground truth only: the ground-truth boxes serve as both inputs and targets.
                sim.sequence = load_sequence_dir(dir);
                if (!sim.sequence.gt) throw DataError(dir + ": no gt/gt.txt to train from");
                sim.sequence.frames.clear();
                for (const auto& [frame, rows] : *sim.sequence.gt) {
                    for (const auto& r : rows) {
                        sim.sequence.frames[frame].push_back({r.box, 1.0, std::nullopt});
                        sim.detection_identity[frame].push_back(r.id);
                    }
                }
            }
            auto part = extract_tracklets(sim, tracklet_length, stride);
            out_set.insert(out_set.end(), part.begin(), part.end());
        }
        return out_set;
    }

    void run() const {
        const RunConfig c = cfg.resolve();
        if (data.empty() && simulated <= 0) throw UsageError("train needs --data or --simulated");
        std::vector<TrainingTracklet> set = from_dirs();
        if (simulated > 0) {
            auto part = simulate_tracklets(c.simulator, c.simulator.seed, simulated, tracklet_length, stride);
            set.insert(set.end(), part.begin(), part.end());
        }
        if (set.empty()) throw DataError("no training tracklets could be extracted");
        TrainHooks hooks;
        if (validation_sequences > 0) {
            const auto held_out = simulate_tracklets(c.simulator, c.simulator.seed + 1'000'000,
                                                     validation_sequences, tracklet_length, stride);
            hooks.validation = make_eval_samples(held_out, c.trainer.window, c.trainer.seed + 1);
        }
        hooks.keep_best = keep_best;
        hooks.on_epoch = [](const EpochStats& e, const ModelParams&) {
            std::printf("epoch %3d  loss %.5f  ade_val %.3f\n", e.epoch, e.mean_loss, e.ade_val);
            std::fflush(stdout);
        };
        std::cout << "training on " << set.size() << " tracklets\n";
        const TrainResult result = train(set, c.model, c.trainer, hooks);
        save_checkpoint(out, result.params);
        if (!log.empty()) write_training_log(log, result.curve);
        if (keep_best) std::cout << "kept epoch " << result.selected_epoch << '\n';
        std::cout << "wrote " << out << '\n';
    }
};

struct TrackCmd {
    ConfigOptions cfg;
    std::string input, det, embeddings, seqinfo, checkpoint, out, eval_csv;
    bool simulate = false;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("track", "run the tracker over a sequence");
        cfg.attach(app, {kAssociationFlags, kSimulatorFlags});
        app->add_option("-i,--input", input, "sequence directory (seqinfo.ini, det/, optional gt/)");
        app->add_option("--det", det, "detection file when no sequence directory is given");
        app->add_option("--embeddings", embeddings, "embedding CSV aligned with --det");
        app->add_option("--seqinfo", seqinfo, "seqinfo.ini for --det");
        app->add_flag("--simulate", simulate, "track a scenario generated from [simulator]");
        app->add_option("--checkpoint", checkpoint, "motion model; constant velocity when omitted");
        app->add_option("-o,--out", out, "results file to write")->required();
        app->add_option("--eval-csv", eval_csv, "write the evaluation CSV when ground truth exists");
        app->callback([this] { run(); });
    }

    void run() const {
        const RunConfig c = cfg.resolve();
        const int sources = (input.empty() ? 0 : 1) + (det.empty() ? 0 : 1) + (simulate ? 1 : 0);
        if (sources != 1) throw UsageError("track needs exactly one of --input, --det or --simulate");
        SequenceData seq;
        if (!input.empty()) {
            seq = load_sequence_dir(input);
        } else if (!det.empty()) {
            ReadStats stats;
            seq = read_detections(det, &stats);
            if (stats.rejected > 0) std::cerr << "warning: " << stats.rejected << " rows with negative size skipped\n";
            if (!seqinfo.empty()) read_seqinfo(seqinfo, seq);
            if (!embeddings.empty()) attach_embeddings(seq, read_embeddings(embeddings));
        } else {
            seq = generate(c.simulator).sequence;
        }
        const auto predictor = load_predictor(checkpoint);
        const TrackingRun run = run_sequence(seq, c.tracker, c.association, predictor);
        write_results(out, run.results);
        std::printf("%d frames, core %.3f s, %.1f FPS (%s predictor)\n", run.frames,
                    run.core_seconds, run.fps(), predictor->name().c_str());
        if (seq.gt) {
            const EvalReport r = evaluate(*seq.gt, run.results, 0.5, seq.name);
            write_report_table(std::cout, {r});
            if (!eval_csv.empty()) {
                std::ofstream f(eval_csv);
                if (!f) throw DataError("cannot write '" + eval_csv + "'");
                write_report_csv(f, {r});
            }
        }
    }
};

struct EvalCmd {
    std::vector<std::string> gt, results;
    std::string csv;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("eval", "score result files against ground truth");
        app->add_option("--gt", gt, "ground-truth file or sequence directory (repeatable)")->required();
        app->add_option("--results", results, "result file, one per --gt")->required();
        app->add_option("--csv", csv, "also write the report as CSV");
        app->callback([this] { run(); });
    }

    void run() const {
        if (gt.size() != results.size()) throw UsageError("give one --results per --gt");
        std::vector<EvalReport> reports;
        for (std::size_t i = 0; i < gt.size(); ++i) {
            reports.push_back(evaluate(load_gt(gt[i]), read_results(results[i]), 0.5,
                                       fs::path(results[i]).stem().string()));
        }
        if (reports.size() > 1) reports.push_back(aggregate(reports));
        write_report_table(std::cout, reports);
        if (!csv.empty()) {
            std::ofstream f(csv);
            if (!f) throw DataError("cannot write '" + csv + "'");
            write_report_csv(f, reports);
        }
    }
};

struct ReportCmd {
    std::string gt, results, out;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("report", "metrics CSV plus SVG trajectory and metric plots");
        app->add_option("--gt", gt, "sequence directory with gt/gt.txt and seqinfo.ini")->required();
        app->add_option("--results", results, "result file")->required();
        app->add_option("-o,--out", out, "output directory")->required();
        app->callback([this] { run(); });
    }

    void run() const {
        SequenceData info;
        if (fs::is_directory(gt) && fs::exists(fs::path(gt) / "seqinfo.ini")) {
            read_seqinfo((fs::path(gt) / "seqinfo.ini").string(), info);
        }
        const LabeledFrames truth = load_gt(gt);
        const LabeledFrames res = read_results(results);
        const EvalReport r = evaluate(truth, res, 0.5, info.name);
        fs::create_directories(out);
        {
            std::ofstream f(fs::path(out) / "metrics.csv");
            if (!f) throw DataError("cannot write into '" + out + "'");
            write_report_csv(f, {r});
        }
        tools::write_trajectory_svg((fs::path(out) / "trajectories.svg").string(), truth, res,
                                    info.image_width, info.image_height);
        tools::write_metric_bars_svg((fs::path(out) / "metrics.svg").string(), r);
        write_report_table(std::cout, {r});
        std::cout << "wrote metrics.csv, trajectories.svg, metrics.svg to " << out << '\n';
    }
};

struct SweepCmd {
    ConfigOptions cfg;
    std::vector<std::string> axes;
    std::string seeds = "1";
    std::string checkpoint, out;
    int train_simulated = 0;

    void attach(CLI::App& root) {
        auto* app = root.add_subcommand("sweep", "evaluate a configuration grid on simulated scenarios");
        cfg.attach(app, {kAssociationFlags, kModelFlags, kSimulatorFlags});
        app->add_option("--grid", axes, "axis section.key=v1,v2,... (repeatable)")->required();
        app->add_option("--seeds", seeds, "scenario seeds, e.g. 1,2,3 or 1-5");
        app->add_option("--checkpoint", checkpoint, "motion model shared by all cells");
        app->add_option("--train-simulated", train_simulated,
                        "train one model per cell on this many simulated sequences");
        app->add_option("-o,--out", out, "CSV to write; stdout when omitted");
        app->callback([this] { run(); });
    }

    void run() const {
        const RunConfig base = cfg.resolve();
        std::vector<SweepAxis> grid;
        for (const auto& a : axes) grid.push_back(parse_sweep_axis(a));
        if (!checkpoint.empty() && train_simulated > 0) {
            throw UsageError("--checkpoint and --train-simulated are exclusive");
        }
        PredictorFactory factory;
        if (!checkpoint.empty()) {
            auto shared = load_predictor(checkpoint);
            factory = [shared](const RunConfig&) { return shared; };
        } else if (train_simulated > 0) {
            const int sequences = train_simulated;
            factory = [sequences](const RunConfig& c) -> std::shared_ptr<const MotionPredictor> {
                Scenario s = c.simulator;
                s.n_frames = std::max(s.n_frames, 200);
                const auto set = simulate_tracklets(s, 10'000, sequences, 20, 10);
                return std::make_shared<LearnedPredictor>(train(set, c.model, c.trainer).params);
            };
        }
        const auto cells = run_sweep(base, grid, parse_seeds(seeds), factory, worker_count());
        if (out.empty()) {
            write_sweep_csv(std::cout, grid, cells);
        } else {
            std::ofstream f(out);
            if (!f) throw DataError("cannot write '" + out + "'");
            write_sweep_csv(f, grid, cells);
            std::cout << "wrote " << cells.size() << " rows to " << out << '\n';
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"playtrack: online multi-object tracking engine"};
    app.require_subcommand(1);
    // Option callbacks run before the subcommand requirement is checked.
    app.add_flag_callback("--print-default-config", [] {
        std::cout << to_ini(RunConfig{});
        std::exit(0);
    }, "print the default configuration and exit");

    SimulateCmd simulate;
    TrainCmd train;
    TrackCmd track;
    EvalCmd eval;
    ReportCmd report;
    SweepCmd sweep;
    simulate.attach(app);
    train.attach(app);
    track.attach(app);
    eval.attach(app);
    report.attach(app);
    sweep.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    }
    return 0;
}
