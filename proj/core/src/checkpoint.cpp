#include "playtrack/checkpoint.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace playtrack {

namespace {

constexpr const char* kFormatName = "playtrack-motion-checkpoint";

}  // namespace

std::string checkpoint_to_string(const ModelParams& params) {
    nlohmann::ordered_json doc;
    doc["format"] = kFormatName;
    doc["version"] = kCheckpointVersion;
    const auto& c = params.config;
    doc["hyperparams"] = {{"blocks", c.blocks}, {"window", c.window},   {"d_model", c.d_model},
                          {"d_state", c.d_state}, {"heads", c.heads}, {"d_ff", c.d_ff}};
    auto& tensors = doc["tensors"];
    tensors = nlohmann::ordered_json::object();
    params.for_each_tensor([&](const std::string& name, const Matrix& m) {
        std::vector<double> flat(m.data(), m.data() + m.size());
        tensors[name] = {{"shape", {m.rows(), m.cols()}}, {"data", flat}};
    });
    return doc.dump(1);
}

ModelParams checkpoint_from_string(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != kFormatName) {
        throw std::runtime_error("not a playtrack motion checkpoint");
    }
    if (doc.value("version", 0) != kCheckpointVersion) {
        throw std::runtime_error("unsupported checkpoint version " +
                                 std::to_string(doc.value("version", 0)));
    }
    const auto& hp = doc.at("hyperparams");
    ModelConfig cfg;
    cfg.blocks = hp.at("blocks").get<int>();
    cfg.window = hp.at("window").get<int>();
    cfg.d_model = hp.at("d_model").get<int>();
    cfg.d_state = hp.at("d_state").get<int>();
    cfg.heads = hp.at("heads").get<int>();
    cfg.d_ff = hp.at("d_ff").get<int>();
    ModelParams params = ModelParams::zeros(cfg);
    const auto& tensors = doc.at("tensors");
    params.for_each_tensor([&](const std::string& name, Matrix& m) {
        if (!tensors.contains(name)) throw std::runtime_error("checkpoint is missing tensor " + name);
        const auto& t = tensors.at(name);
        const auto shape = t.at("shape").get<std::vector<Eigen::Index>>();
        const auto data = t.at("data").get<std::vector<double>>();
        if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols() ||
            static_cast<Eigen::Index>(data.size()) != m.size()) {
            throw std::runtime_error("checkpoint tensor " + name + " has the wrong shape");
        }
        std::copy(data.begin(), data.end(), m.data());
    });
    if (!params.all_finite()) throw std::runtime_error("checkpoint holds non-finite values");
    return params;
}

void save_checkpoint(const std::string& path, const ModelParams& params) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out << checkpoint_to_string(params) << '\n';
}

ModelParams load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return checkpoint_from_string(buf.str());
}

}  // namespace playtrack
