#include "playtrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace playtrack {

namespace {

struct Agent {
    double cx = 0.0, cy = 0.0;
    double vx = 0.0, vy = 0.0;
    double ax = 0.0, ay = 0.0;
    double turn = 0.0;
    double aspect = 0.4;
    int segment_left = 0;
};

struct PairEpisode {
    bool active = false;
    bool real = false;
    bool merge = false;
};

class Field {
public:
    explicit Field(const Scenario& s) : s_(s) {
        const double k = (s.box_height_near - s.box_height_far) / s.image_height;
        cy_lo_ = s.box_height_far / (2.0 - k);
        cy_hi_ = (s.image_height - 0.5 * s.box_height_far) / (1.0 + 0.5 * k);
        const double w_max = s.aspect_max * s.box_height_near;
        cx_lo_ = 0.5 * w_max;
        cx_hi_ = s.image_width - 0.5 * w_max;
    }

    [[nodiscard]] double height_at(double cy) const {
        return s_.box_height_far + (s_.box_height_near - s_.box_height_far) * cy / s_.image_height;
    }

    [[nodiscard]] BoundingBox box(const Agent& a) const {
        const double h = height_at(a.cy);
        const double w = a.aspect * h;
        return {a.cx - 0.5 * w, a.cy - 0.5 * h, w, h};
    }

    void reflect(Agent& a) const {
        reflect_axis(a.cx, a.vx, a.ax, cx_lo_, cx_hi_);
        reflect_axis(a.cy, a.vy, a.ay, cy_lo_, cy_hi_);
    }

    [[nodiscard]] double cx_lo() const { return cx_lo_; }
    [[nodiscard]] double cx_hi() const { return cx_hi_; }
    [[nodiscard]] double cy_lo() const { return cy_lo_; }
    [[nodiscard]] double cy_hi() const { return cy_hi_; }

private:
    static void reflect_axis(double& p, double& v, double& acc, double lo, double hi) {
        if (p < lo) {
            p = 2.0 * lo - p;
            v = std::abs(v);
            acc = std::abs(acc);
        } else if (p > hi) {
            p = 2.0 * hi - p;
            v = -std::abs(v);
            acc = -std::abs(acc);
        }
        p = std::clamp(p, lo, hi);
    }

    const Scenario& s_;
    double cy_lo_, cy_hi_, cx_lo_, cx_hi_;
};

double intersection_area(const BoundingBox& a, const BoundingBox& b) {
    const double iw = std::min(a.x2(), b.x2()) - std::max(a.x, b.x);
    const double ih = std::min(a.y2(), b.y2()) - std::max(a.y, b.y);
    return iw > 0.0 && ih > 0.0 ? iw * ih : 0.0;
}

BoundingBox union_box(const BoundingBox& a, const BoundingBox& b) {
    const double x = std::min(a.x, b.x), y = std::min(a.y, b.y);
    return {x, y, std::max(a.x2(), b.x2()) - x, std::max(a.y2(), b.y2()) - y};
}

void validate_rate(double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
}

}  // namespace

BoundingBox visible_part(const BoundingBox& far, const BoundingBox& occluder) {
    double x0 = far.x, x1 = far.x2(), y0 = far.y, y1 = far.y2();
    if (occluder.y <= far.y && occluder.y2() >= far.y2()) {
        if (occluder.x <= x0 && occluder.x2() > x0) x0 = occluder.x2();
        if (occluder.x2() >= x1 && occluder.x < x1) x1 = occluder.x;
    }
    if (occluder.x <= far.x && occluder.x2() >= far.x2()) {
        if (occluder.y <= y0 && occluder.y2() > y0) y0 = occluder.y2();
        if (occluder.y2() >= y1 && occluder.y < y1) y1 = occluder.y;
    }
    if (x1 <= x0 || y1 <= y0) return far;
    return {x0, y0, x1 - x0, y1 - y0};
}

MotionProfile parse_motion_profile(std::string_view name) {
    if (name == "linear") return MotionProfile::kLinear;
    if (name == "curved") return MotionProfile::kCurved;
    if (name == "sprint-and-cut" || name == "sprint") return MotionProfile::kSprintAndCut;
    throw std::invalid_argument("unknown motion profile '" + std::string(name) + "'");
}

std::string to_string(MotionProfile profile) {
    switch (profile) {
        case MotionProfile::kLinear: return "linear";
        case MotionProfile::kCurved: return "curved";
        case MotionProfile::kSprintAndCut: return "sprint-and-cut";
    }
    return "unknown";
}

void Scenario::validate() const {
    if (n_agents <= 0 || n_frames <= 0) throw std::invalid_argument("n_agents and n_frames must be positive");
    if (!(image_width > 0.0 && image_height > 0.0 && fps > 0.0)) {
        throw std::invalid_argument("image size and fps must be positive");
    }
    validate_rate(occlusion_rate, "occlusion_rate");
    validate_rate(miss_rate, "miss_rate");
    validate_rate(merge_probability, "merge_probability");
    validate_rate(conf_occlusion_weight, "conf_occlusion_weight");
    if (noise_sigma < 0.0 || false_positive_rate < 0.0 || max_speed <= 0.0 || max_accel < 0.0) {
        throw std::invalid_argument("noise, false-positive rate, speed and acceleration must be non-negative");
    }
    if (segment_min < 1 || segment_max < segment_min || pan_period < 1) {
        throw std::invalid_argument("segment lengths and pan period must be positive and ordered");
    }
    if (!(box_height_far > 0.0 && box_height_near >= box_height_far &&
          box_height_near < 0.5 * image_height)) {
        throw std::invalid_argument("box heights must satisfy 0 < far <= near < image_height / 2");
    }
    if (!(aspect_min > 0.0 && aspect_max >= aspect_min) || aspect_max * box_height_near * 2.0 >= image_width) {
        throw std::invalid_argument("box aspect range is invalid for the image size");
    }
    if (conf_jitter_scale <= 0.0 || embedding_dim <= 0 || teams < 1) {
        throw std::invalid_argument("conf_jitter_scale, embedding_dim and teams must be positive");
    }
    if (team_similarity < 0.0 || team_similarity >= 1.0) throw std::invalid_argument("team_similarity must lie in [0, 1)");
}

SimulatedSequence generate(const Scenario& s) {
    s.validate();
    std::mt19937_64 rng(s.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Field field(s);
    const auto n = static_cast<std::size_t>(s.n_agents);
    const SyntheticEmbeddingProvider provider(s.embedding_dim, s.seed ^ 0x5eedULL, s.embedding_noise,
                                              s.teams, s.team_similarity);

    const auto redraw_segment = [&](Agent& a) {
        std::uniform_int_distribution<int> len(s.segment_min, s.segment_max);
        a.segment_left = len(rng);
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        const double mag = s.max_accel * unit(rng);
        a.ax = mag * std::cos(theta);
        a.ay = mag * std::sin(theta) * s.vertical_scale;
        a.turn = (unit(rng) - 0.5) * 0.08;
    };

    std::vector<Agent> agents(n);
    for (auto& a : agents) {
        a.cx = field.cx_lo() + unit(rng) * (field.cx_hi() - field.cx_lo());
        a.cy = field.cy_lo() + unit(rng) * (field.cy_hi() - field.cy_lo());
        const double theta = 2.0 * std::numbers::pi * unit(rng);
        const double speed = s.profile == MotionProfile::kLinear
                                 ? s.max_speed * (0.2 + 0.8 * unit(rng))
                                 : 0.5 * s.max_speed * unit(rng);
        a.vx = speed * std::cos(theta);
        a.vy = speed * std::sin(theta) * s.vertical_scale;
        a.aspect = s.aspect_min + unit(rng) * (s.aspect_max - s.aspect_min);
        redraw_segment(a);
    }

    SimulatedSequence out;
    SequenceData& seq = out.sequence;
    seq.name = "sim-" + to_string(s.profile) + "-" + std::to_string(s.seed);
    seq.image_width = s.image_width;
    seq.image_height = s.image_height;
    seq.fps = s.fps;
    seq.length = s.n_frames;
    seq.gt = LabeledFrames{};

    std::vector<PairEpisode> episodes(n * n);
    std::vector<double> prev_speed(n, 0.0);
    int fp_identity = 1'000'000;

    for (int frame = 1; frame <= s.n_frames; ++frame) {
        if (frame > 1) {
            const double pan = s.pan_amplitude *
                               std::sin(2.0 * std::numbers::pi * frame / static_cast<double>(s.pan_period));
            for (auto& a : agents) {
                switch (s.profile) {
                    case MotionProfile::kLinear: break;
                    case MotionProfile::kCurved: {
                        if (--a.segment_left <= 0) redraw_segment(a);
                        const double c = std::cos(a.turn), sn = std::sin(a.turn);
                        const double vx = c * a.vx - sn * a.vy;
                        a.vy = sn * a.vx + c * a.vy;
                        a.vx = vx;
                        break;
                    }
                    case MotionProfile::kSprintAndCut: {
                        if (--a.segment_left <= 0) redraw_segment(a);
                        a.vx += a.ax;
                        a.vy += a.ay;
                        break;
                    }
                }
                const double speed = std::hypot(a.vx, a.vy);
                if (speed > s.max_speed) {
                    a.vx *= s.max_speed / speed;
                    a.vy *= s.max_speed / speed;
                }
                a.cx += a.vx + pan;
                a.cy += a.vy;
                field.reflect(a);
            }
        }

        std::vector<BoundingBox> gt(n);
        auto& gt_rows = (*seq.gt)[frame];
        for (std::size_t i = 0; i < n; ++i) {
            gt[i] = field.box(agents[i]);
            gt_rows.push_back({static_cast<int>(i) + 1, gt[i], 1.0});
        }

        // Occlusion bookkeeping: the agent whose bottom edge is higher is farther away.
        std::vector<double> covered(n, 0.0);
        std::vector<int> occluder(n, -1);
        std::vector<char> merge(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                PairEpisode& ep = episodes[i * n + j];
                const double inter = intersection_area(gt[i], gt[j]);
                if (inter <= 0.0) {
                    ep.active = false;
                    continue;
                }
                if (!ep.active) {
                    ep.active = true;
                    ep.real = unit(rng) < s.occlusion_rate;
                    ep.merge = unit(rng) < s.merge_probability;
                }
                if (!ep.real) continue;
                const std::size_t far = gt[i].y2() < gt[j].y2() ? i : j;
                const std::size_t near = far == i ? j : i;
                const double cov = inter / gt[far].area();
                if (cov > covered[far]) {
                    covered[far] = cov;
                    occluder[far] = static_cast<int>(near);
                    merge[far] = ep.merge ? 1 : 0;
                }
            }
        }

        struct Pending {
            Detection det;
            int identity;
            double occlusion;
            double blur;
        };
        std::vector<Pending> pending;
        std::vector<int> slot(n, -1);
        for (std::size_t i = 0; i < n; ++i) {
            const bool missed = unit(rng) < s.miss_rate;
            std::array<double, 4> jitter{};
            for (double& v : jitter) v = s.noise_sigma > 0.0 ? s.noise_sigma * gauss(rng) : 0.0;
            if (missed || covered[i] >= 0.5) continue;
            BoundingBox box = gt[i];
            if (s.truncate_partial && covered[i] > 0.0 && occluder[i] >= 0) {
                box = visible_part(box, gt[static_cast<std::size_t>(occluder[i])]);
            }
            double rms = 0.0;
            for (double v : jitter) rms += v * v;
            rms = std::sqrt(rms / 4.0);
            box = {box.x + jitter[0], box.y + jitter[1], std::max(box.w + jitter[2], 1.0),
                   std::max(box.h + jitter[3], 1.0)};
            const double jitter_term = s.noise_sigma > 0.0 ? rms / (s.conf_jitter_scale * s.noise_sigma) : 0.0;
            const double conf = std::clamp(1.0 - jitter_term - s.conf_occlusion_weight * covered[i], 0.0, 1.0);
            const double speed = std::hypot(agents[i].vx, agents[i].vy);
            slot[i] = static_cast<int>(pending.size());
            pending.push_back({{box, conf, std::nullopt}, static_cast<int>(i) + 1, covered[i],
                               std::min(speed / s.max_speed, 1.0)});
        }
        // Heavily covered agents with a merge flag enlarge their occluder's detection.
        for (std::size_t i = 0; i < n; ++i) {
            if (covered[i] < 0.5 || !merge[i] || occluder[i] < 0) continue;
            const int k = slot[static_cast<std::size_t>(occluder[i])];
            if (k < 0) continue;
            Pending& p = pending[static_cast<std::size_t>(k)];
            p.det.box = union_box(p.det.box, gt[i]);
            p.det.score = std::max(0.0, p.det.score - 0.5 * s.conf_occlusion_weight);
            p.occlusion = std::max(p.occlusion, 0.5);
        }
        if (s.false_positive_rate > 0.0) {
            std::poisson_distribution<int> count(s.false_positive_rate);
            const int k = count(rng);
            for (int f = 0; f < k; ++f) {
                const double cy = field.cy_lo() + unit(rng) * (field.cy_hi() - field.cy_lo());
                const double h = field.height_at(cy);
                const double w = (s.aspect_min + unit(rng) * (s.aspect_max - s.aspect_min)) * h;
                const double cx = field.cx_lo() + unit(rng) * (field.cx_hi() - field.cx_lo());
                pending.push_back({{{cx - 0.5 * w, cy - 0.5 * h, w, h}, 0.1 + 0.4 * unit(rng), std::nullopt},
                                   fp_identity++, 0.0, 0.0});
            }
        }

        std::shuffle(pending.begin(), pending.end(), rng);
        auto& dets = seq.frames[frame];
        auto& ids = out.detection_identity[frame];
        for (std::size_t j = 0; j < pending.size(); ++j) {
            Pending& p = pending[j];
            if (s.embeddings) {
                p.det.embedding = provider.embed({frame, j, p.identity, p.occlusion, p.blur});
            }
            dets.push_back(std::move(p.det));
            ids.push_back(p.identity <= s.n_agents ? p.identity : -1);
        }
        if (dets.empty()) {
            seq.frames.erase(frame);
            out.detection_identity.erase(frame);
        }
    }
    return out;
}

void write_simulation(const std::string& dir, const SimulatedSequence& sim) {
    write_sequence_dir(dir, sim.sequence);
    const std::string path = (std::filesystem::path(dir) / "identities.txt").string();
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (const auto& [frame, ids] : sim.detection_identity) {
        for (std::size_t j = 0; j < ids.size(); ++j) out << frame << ',' << j << ',' << ids[j] << '\n';
    }
}

SimulatedSequence load_simulation(const std::string& dir) {
    SimulatedSequence sim;
    sim.sequence = load_sequence_dir(dir);
    const std::string path = (std::filesystem::path(dir) / "identities.txt").string();
    std::ifstream in(path);
    if (!in) throw DataError("missing identity sidecar '" + path + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        int frame = 0, identity = 0;
        std::size_t index = 0;
        char c1 = 0, c2 = 0;
        if (!(row >> frame >> c1 >> index >> c2 >> identity) || c1 != ',' || c2 != ',') {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected frame,detection_index,identity");
        }
        auto& ids = sim.detection_identity[frame];
        if (ids.size() <= index) ids.resize(index + 1, -1);
        ids[index] = identity;
    }
    for (const auto& [frame, dets] : sim.sequence.frames) {
        if (sim.detection_identity[frame].size() != dets.size()) {
            throw DataError(path + ": identity rows do not match the detections of frame " + std::to_string(frame));
        }
    }
    return sim;
}

std::vector<TrainingTracklet> extract_tracklets(const SimulatedSequence& sim, int length, int stride) {
    if (length < 3 || stride < 1) throw std::invalid_argument("tracklet length >= 3 and stride >= 1 required");
    const SequenceData& seq = sim.sequence;
    if (!seq.gt) throw std::invalid_argument("simulated sequence has no ground truth");
    // identity -> frame -> (detection, ground truth)
    std::map<int, std::map<int, std::pair<BoundingBox, BoundingBox>>> by_identity;
    for (const auto& [frame, dets] : seq.frames) {
        const auto& ids = sim.detection_identity.at(frame);
        const auto gt_it = seq.gt->find(frame);
        if (gt_it == seq.gt->end()) continue;
        for (std::size_t j = 0; j < dets.size(); ++j) {
            if (ids[j] < 0) continue;
            for (const auto& g : gt_it->second) {
                if (g.id == ids[j]) by_identity[ids[j]][frame] = {dets[j].box, g.box};
            }
        }
    }
    const auto norm = [&](const BoundingBox& b) {
        return BoundingBox{b.x / seq.image_width, b.y / seq.image_height, b.w / seq.image_width,
                           b.h / seq.image_height};
    };
    std::vector<TrainingTracklet> out;
    for (const auto& [id, frames] : by_identity) {
        std::vector<std::pair<BoundingBox, BoundingBox>> run;
        int prev = -1;
        const auto flush = [&]() {
            for (std::size_t start = 0; start + static_cast<std::size_t>(length) <= run.size();
                 start += static_cast<std::size_t>(stride)) {
                TrainingTracklet t;
                t.image_width = seq.image_width;
                t.image_height = seq.image_height;
                for (std::size_t k = start; k < start + static_cast<std::size_t>(length); ++k) {
                    t.inputs.push_back(norm(run[k].first));
                    t.targets.push_back(norm(run[k].second));
                }
                out.push_back(std::move(t));
            }
            run.clear();
        };
        for (const auto& [frame, pair] : frames) {
            if (prev >= 0 && frame != prev + 1) flush();
            run.push_back(pair);
            prev = frame;
        }
        flush();
    }
    return out;
}

std::vector<TrainingTracklet> simulate_tracklets(const Scenario& scenario, std::uint64_t first_seed,
                                                 int sequences, int length, int stride) {
    std::vector<TrainingTracklet> out;
    Scenario s = scenario;
    s.embeddings = false;
    for (int i = 0; i < sequences; ++i) {
        s.seed = first_seed + static_cast<std::uint64_t>(i);
        auto part = extract_tracklets(generate(s), length, stride);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

}  // namespace playtrack
