#include "playtrack/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace playtrack {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_real(const std::string& v) {
    double out = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
        throw std::invalid_argument("expected a number, got '" + v + "'");
    }
    return out;
}

long long parse_integer(const std::string& v) {
    long long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    }
    return out;
}

bool parse_bool(const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument("expected true or false, got '" + v + "'");
}

std::string format_real(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

struct Binding {
    ConfigKey key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

template <typename Access>
Binding real(std::string section, std::string name, std::string desc, Access access) {
    return {{std::move(section), std::move(name), std::move(desc)},
            [access](RunConfig& c, const std::string& v) { access(c) = parse_real(v); },
            [access](const RunConfig& c) { return format_real(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Binding integer(std::string section, std::string name, std::string desc, Access access) {
    return {{std::move(section), std::move(name), std::move(desc)},
            [access](RunConfig& c, const std::string& v) {
                using T = std::remove_reference_t<decltype(access(c))>;
                access(c) = static_cast<T>(parse_integer(v));
            },
            [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); }};
}

template <typename Access>
Binding boolean(std::string section, std::string name, std::string desc, Access access) {
    return {{std::move(section), std::move(name), std::move(desc)},
            [access](RunConfig& c, const std::string& v) { access(c) = parse_bool(v); },
            [access](const RunConfig& c) {
                return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
            }};
}

#define PT_FIELD(expr) [](RunConfig& c) -> auto& { return expr; }

const std::vector<Binding>& bindings() {
    static const std::vector<Binding> table = {
        boolean("geometry", "hiou_abs", "absolute value instead of clamping in the height overlap",
                PT_FIELD(c.association.geometry.hiou_abs)),
        boolean("geometry", "hiou_on_expanded", "height factor of ha-eiou on buffer-expanded boxes",
                PT_FIELD(c.association.geometry.hiou_on_expanded)),

        integer("model", "blocks", "stacked SSM/attention/FFN blocks (M)", PT_FIELD(c.model.blocks)),
        integer("model", "window", "tracklet window w", PT_FIELD(c.model.window)),
        integer("model", "d_model", "model width d", PT_FIELD(c.model.d_model)),
        integer("model", "d_state", "SSM state size per channel", PT_FIELD(c.model.d_state)),
        integer("model", "heads", "attention heads L", PT_FIELD(c.model.heads)),
        integer("model", "d_ff", "FFN hidden width", PT_FIELD(c.model.d_ff)),

        integer("trainer", "epochs", "training epochs", PT_FIELD(c.trainer.epochs)),
        integer("trainer", "batch_size", "samples per optimizer step", PT_FIELD(c.trainer.batch_size)),
        real("trainer", "lr", "AdamW learning rate", PT_FIELD(c.trainer.lr)),
        real("trainer", "weight_decay", "decoupled weight decay", PT_FIELD(c.trainer.weight_decay)),
        real("trainer", "beta1", "AdamW first-moment decay", PT_FIELD(c.trainer.beta1)),
        real("trainer", "beta2", "AdamW second-moment decay", PT_FIELD(c.trainer.beta2)),
        real("trainer", "adam_eps", "AdamW epsilon", PT_FIELD(c.trainer.adam_eps)),
        real("trainer", "lambda_l1", "weight of the smooth-L1 term", PT_FIELD(c.trainer.loss.l1)),
        real("trainer", "lambda_ciou", "weight of the CIoU term", PT_FIELD(c.trainer.loss.ciou)),
        integer("trainer", "seed", "initialization and shuffling seed", PT_FIELD(c.trainer.seed)),
        real("trainer", "p_temporal", "probability of a random sub-window", PT_FIELD(c.trainer.augment.p_temporal)),
        real("trainer", "p_scale", "probability of random scaling", PT_FIELD(c.trainer.augment.p_scale)),
        real("trainer", "p_translate", "probability of random translation", PT_FIELD(c.trainer.augment.p_translate)),
        real("trainer", "p_noise", "probability of coordinate noise", PT_FIELD(c.trainer.augment.p_noise)),
        real("trainer", "scale_min", "lower scale factor", PT_FIELD(c.trainer.augment.scale_min)),
        real("trainer", "scale_max", "upper scale factor", PT_FIELD(c.trainer.augment.scale_max)),
        real("trainer", "translate", "translation bound, fraction of the image", PT_FIELD(c.trainer.augment.translate)),
        real("trainer", "noise_sigma", "noise sigma, fraction of the image", PT_FIELD(c.trainer.augment.noise_sigma)),

        real("association", "b1", "buffer of the high-confidence stage", PT_FIELD(c.association.b1)),
        real("association", "b2", "buffer of the low-confidence stage", PT_FIELD(c.association.b2)),
        real("association", "lambda_reid", "weight of the appearance cost", PT_FIELD(c.association.lambda_reid)),
        real("association", "lambda_ssim", "weight of the spatial cost", PT_FIELD(c.association.lambda_ssim)),
        real("association", "high_conf_thresh", "minimum score of high-confidence detections",
             PT_FIELD(c.association.high_conf_thresh)),
        real("association", "low_conf_thresh", "minimum score of low-confidence detections",
             PT_FIELD(c.association.low_conf_thresh)),
        real("association", "gate_threshold", "pairs with lower spatial similarity are never matched",
             PT_FIELD(c.association.gate_threshold)),
        {{"association", "metric", "iou | eiou | hiou | ha-eiou"},
         [](RunConfig& c, const std::string& v) { c.association.metric = parse_metric(v); },
         [](const RunConfig& c) { return to_string(c.association.metric); }},

        integer("tracker", "max_lost", "frames a lost tracklet is kept", PT_FIELD(c.tracker.max_lost)),
        integer("tracker", "min_hits", "matches before a tracklet is reported", PT_FIELD(c.tracker.min_hits)),
        real("tracker", "ema_alpha", "appearance smoothing factor alpha", PT_FIELD(c.tracker.ema_alpha)),
        real("tracker", "ema_sigma", "confidence floor sigma of the dynamic smoothing", PT_FIELD(c.tracker.ema_sigma)),
        boolean("tracker", "ema_convex", "convex appearance update", PT_FIELD(c.tracker.ema_convex)),

        integer("simulator", "n_agents", "number of agents", PT_FIELD(c.simulator.n_agents)),
        real("simulator", "image_width", "image width in pixels", PT_FIELD(c.simulator.image_width)),
        real("simulator", "image_height", "image height in pixels", PT_FIELD(c.simulator.image_height)),
        integer("simulator", "n_frames", "frames per sequence", PT_FIELD(c.simulator.n_frames)),
        real("simulator", "fps", "frame rate written to seqinfo.ini", PT_FIELD(c.simulator.fps)),
        {{"simulator", "motion_profile", "linear | curved | sprint-and-cut"},
         [](RunConfig& c, const std::string& v) { c.simulator.profile = parse_motion_profile(v); },
         [](const RunConfig& c) { return to_string(c.simulator.profile); }},
        integer("simulator", "seed", "scenario seed", PT_FIELD(c.simulator.seed)),
        real("simulator", "max_speed", "speed cap, pixels per frame", PT_FIELD(c.simulator.max_speed)),
        real("simulator", "max_accel", "acceleration bound, pixels per frame^2", PT_FIELD(c.simulator.max_accel)),
        integer("simulator", "segment_min", "shortest constant-acceleration segment", PT_FIELD(c.simulator.segment_min)),
        integer("simulator", "segment_max", "longest constant-acceleration segment", PT_FIELD(c.simulator.segment_max)),
        real("simulator", "vertical_scale", "damping of vertical motion", PT_FIELD(c.simulator.vertical_scale)),
        real("simulator", "box_height_far", "box height at the top edge", PT_FIELD(c.simulator.box_height_far)),
        real("simulator", "box_height_near", "box height at the bottom edge", PT_FIELD(c.simulator.box_height_near)),
        real("simulator", "aspect_min", "smallest width/height ratio", PT_FIELD(c.simulator.aspect_min)),
        real("simulator", "aspect_max", "largest width/height ratio", PT_FIELD(c.simulator.aspect_max)),
        real("simulator", "occlusion_rate", "probability that an overlap is a real occlusion",
             PT_FIELD(c.simulator.occlusion_rate)),
        real("simulator", "merge_probability", "merge instead of drop under heavy coverage",
             PT_FIELD(c.simulator.merge_probability)),
        boolean("simulator", "truncate_partial", "partially covered boxes shrink to the visible side",
                PT_FIELD(c.simulator.truncate_partial)),
        real("simulator", "noise_sigma", "detector jitter, pixels", PT_FIELD(c.simulator.noise_sigma)),
        real("simulator", "miss_rate", "probability a detection is dropped", PT_FIELD(c.simulator.miss_rate)),
        real("simulator", "conf_jitter_scale", "jitter multiple of sigma that zeroes confidence",
             PT_FIELD(c.simulator.conf_jitter_scale)),
        real("simulator", "conf_occlusion_weight", "confidence lost per unit of coverage",
             PT_FIELD(c.simulator.conf_occlusion_weight)),
        real("simulator", "false_positive_rate", "spurious detections per frame", PT_FIELD(c.simulator.false_positive_rate)),
        real("simulator", "pan_amplitude", "camera pan speed amplitude, pixels per frame",
             PT_FIELD(c.simulator.pan_amplitude)),
        integer("simulator", "pan_period", "camera pan period in frames", PT_FIELD(c.simulator.pan_period)),
        boolean("simulator", "embeddings", "emit appearance embeddings", PT_FIELD(c.simulator.embeddings)),
        integer("simulator", "embedding_dim", "appearance embedding dimension", PT_FIELD(c.simulator.embedding_dim)),
        integer("simulator", "teams", "number of look-alike groups", PT_FIELD(c.simulator.teams)),
        real("simulator", "team_similarity", "cosine between players of one team", PT_FIELD(c.simulator.team_similarity)),
        real("simulator", "embedding_noise", "base appearance noise", PT_FIELD(c.simulator.embedding_noise.base)),
        real("simulator", "embedding_occlusion_gain", "appearance noise per unit of coverage",
             PT_FIELD(c.simulator.embedding_noise.occlusion_gain)),
        real("simulator", "embedding_blur_gain", "appearance noise at full speed",
             PT_FIELD(c.simulator.embedding_noise.blur_gain)),
    };
    return table;
}

#undef PT_FIELD

const Binding& find_binding(const std::string& section, const std::string& name) {
    for (const auto& b : bindings()) {
        if (b.key.section == section && b.key.name == name) return b;
    }
    throw UsageError("unknown configuration key '" + section + "." + name + "'");
}

std::pair<std::string, std::string> split_dotted(const std::string& dotted) {
    const auto dot = dotted.find('.');
    if (dot == std::string::npos) throw UsageError("configuration key must be section.key: '" + dotted + "'");
    return {dotted.substr(0, dot), dotted.substr(dot + 1)};
}

}  // namespace

void RunConfig::validate() const {
    const auto check = [](const char* section, const auto& fn) {
        try {
            fn();
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("[") + section + "] " + e.what());
        }
    };
    check("model", [&] { model.validate(); });
    check("trainer", [&] { trainer.validate(); });
    check("association", [&] { association.validate(); });
    check("tracker", [&] { tracker.validate(); });
    check("simulator", [&] { simulator.validate(); });
    if (trainer.window != model.window || tracker.history != model.window) {
        throw UsageError("[model] window must match the trainer window and tracker history");
    }
}

const std::vector<ConfigKey>& config_keys() {
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& b : bindings()) out.push_back(b.key);
        return out;
    }();
    return keys;
}

void set_config_value(RunConfig& cfg, const std::string& dotted_key, const std::string& value) {
    const auto [section, name] = split_dotted(dotted_key);
    const Binding& b = find_binding(section, name);
    try {
        b.set(cfg, trim(value));
    } catch (const std::invalid_argument& e) {
        throw UsageError(dotted_key + ": " + e.what());
    }
    // The model window also bounds the training windows and the tracklet history.
    if (dotted_key == "model.window") {
        cfg.trainer.window = cfg.model.window;
        cfg.tracker.history = cfg.model.window;
    }
}

std::string get_config_value(const RunConfig& cfg, const std::string& dotted_key) {
    const auto [section, name] = split_dotted(dotted_key);
    return find_binding(section, name).get(cfg);
}

RunConfig parse_config(std::istream& in, const std::string& source) {
    RunConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find_first_of("#;");
        const std::string s = trim(comment == std::string::npos ? line : line.substr(0, comment));
        if (s.empty()) continue;
        const std::string where = source + ":" + std::to_string(line_no) + ": ";
        if (s.front() == '[') {
            if (s.back() != ']') throw UsageError(where + "unterminated section header");
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw UsageError(where + "expected key = value");
        if (section.empty()) throw UsageError(where + "key outside of a [section]");
        try {
            set_config_value(cfg, section + "." + trim(s.substr(0, eq)), s.substr(eq + 1));
        } catch (const UsageError& e) {
            throw UsageError(where + e.what());
        }
    }
    try {
        cfg.validate();
    } catch (const UsageError& e) {
        throw UsageError(source + ": " + e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config '" + path + "'");
    return parse_config(in, path);
}

std::string to_ini(const RunConfig& cfg) {
    std::ostringstream os;
    std::string section;
    for (const auto& b : bindings()) {
        if (b.key.section != section) {
            if (!section.empty()) os << '\n';
            section = b.key.section;
            os << '[' << section << "]\n";
        }
        os << "# " << b.key.description << '\n' << b.key.name << " = " << b.get(cfg) << '\n';
    }
    return os.str();
}

}  // namespace playtrack
