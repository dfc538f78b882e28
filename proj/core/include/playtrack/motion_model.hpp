#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "playtrack/geometry.hpp"

namespace playtrack {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

/// Architecture hyperparameters of the motion predictor.
struct ModelConfig {
    int blocks = 4;    ///< stacked SSM -> attention -> FFN blocks
    int window = 10;   ///< maximum history length fed to the model
    int d_model = 64;
    int d_state = 16;
    int heads = 4;
    int d_ff = 256;

    /// Throws std::invalid_argument on non-positive sizes or d_model % heads != 0.
    void validate() const;
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parameter tensors. Weights are stored (out x in); biases are 1 x out rows.
struct LinearParams {
    Matrix weight;
    Matrix bias;  // empty when the layer has no bias
};

struct LayerNormParams {
    Matrix gain;
    Matrix bias;
};

/// Selective state-space layer: delta = softplus(x W_dt^T + b_dt), B = x W_B^T, C = x W_C^T,
/// A = -exp(a_log) diagonal per channel, y = C h + skip * x.
struct SsmParams {
    LinearParams delta_proj;  // d -> d
    Matrix b_proj;            // d_state x d
    Matrix c_proj;            // d_state x d
    Matrix a_log;             // d x d_state
    Matrix skip;              // 1 x d
};

struct AttentionParams {
    LinearParams query, key, value, output;
};

struct FfnParams {
    LinearParams up;    // d -> d_ff
    LinearParams down;  // d_ff -> d
};

struct BlockParams {
    SsmParams ssm;
    LayerNormParams norm_in;
    AttentionParams attention;
    LayerNormParams norm_out;
    FfnParams ffn;
};

/// Every learnable tensor of the predictor. Also used as the gradient container.
struct ModelParams {
    ModelConfig config;
    LinearParams embed;  // 4 -> d
    std::vector<BlockParams> blocks;
    LinearParams head;   // d -> 4

    /// Zero-filled tensors with the shapes implied by cfg.
    static ModelParams zeros(const ModelConfig& cfg);
    /// Linear layers uniform in +-1/sqrt(fan_in), a_log = log(1..d_state), skip = 1, norms at 1/0.
    static ModelParams initialize(const ModelConfig& cfg, std::uint64_t seed);

    /// Visits (name, tensor) pairs in a fixed order. Names are stable checkpoint keys.
    void for_each_tensor(const std::function<void(const std::string&, Matrix&)>& fn);
    void for_each_tensor(const std::function<void(const std::string&, const Matrix&)>& fn) const;

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] bool all_finite() const;
};

using ModelGradients = ModelParams;

/// Normalized history of one tracklet. Steps with mask == false are padding and are ignored.
struct TrackletWindow {
    std::vector<BoundingBox> boxes;
    std::vector<bool> mask;

    [[nodiscard]] std::size_t valid_count() const;
    /// Left-pads a chronological history (normalized boxes) to `length` steps, keeping the
    /// most recent `length` entries.
    static TrackletWindow from_history(const std::vector<BoundingBox>& history, std::size_t length);
};

/// Next-frame box in normalized coordinates; every component lies in (0, 1).
struct PredictedBox {
    BoundingBox box;
};

// Layer-level forward passes, exposed for testing and for the reference oracles.

/// Runs the discretized recurrence h_k = exp(delta_k A) h_{k-1} + delta_k B_k x_k,
/// y_k = C_k h_k + skip * x_k per channel. Shapes: x, delta T x d; a d x N; b, c T x N.
Matrix selective_scan(const Matrix& x, const Matrix& delta, const Matrix& a, const Matrix& b,
                      const Matrix& c, const Matrix& skip);

/// Full selective SSM layer. Throws std::invalid_argument on empty or non-finite input.
Matrix ssm_forward(const Matrix& x, const SsmParams& params);

/// y_ln = LN(y); out = LN(MHSA(y_ln) + y_ln) with causal scaled dot-product heads.
/// When attention is non-null it receives one T x T row-stochastic matrix per head.
Matrix mhsa_forward(const Matrix& y, const BlockParams& params, int heads,
                    std::vector<Matrix>* attention = nullptr);

/// Linear(GeLU(Linear(x))) + x.
Matrix ffn_forward(const Matrix& x, const FfnParams& params);

double gelu(double u);

/// Full predictor: embed -> blocks -> sigmoid(head(last step)).
/// Throws std::invalid_argument when fewer than 2 steps are valid.
PredictedBox predict(const TrackletWindow& window, const ModelParams& params);

struct ForwardTrace;

/// Forward pass that keeps the activations needed by backward().
struct ForwardResult {
    PredictedBox prediction;
    std::shared_ptr<const ForwardTrace> trace;
};
ForwardResult forward(const TrackletWindow& window, const ModelParams& params);

/// Gradients of a scalar loss with respect to every parameter, given d loss / d prediction.
ModelGradients backward(const ForwardResult& result, const ModelParams& params,
                        const std::array<double, 4>& d_prediction);
/// Same as backward() but adds into an existing gradient set of matching shape.
void backward_accumulate(const ForwardResult& result, const ModelParams& params,
                         const std::array<double, 4>& d_prediction, ModelGradients& grads);

/// Elementwise helpers on parameter sets (used by the optimizer and the gradient check).
void add_scaled(ModelParams& target, const ModelParams& source, double scale);
void scale_all(ModelParams& target, double scale);

}  // namespace playtrack
