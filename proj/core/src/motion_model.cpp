#include "playtrack/motion_model.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

namespace playtrack {

namespace {

constexpr double kLayerNormEps = 1e-5;

double softplus(double z) { return z > 30.0 ? z : std::log1p(std::exp(z)); }
double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double gelu_grad(double u) {
    const double cdf = 0.5 * (1.0 + std::erf(u / std::numbers::sqrt2));
    const double pdf = std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
    return cdf + u * pdf;
}

Matrix linear(const Matrix& x, const LinearParams& p) {
    Matrix y = x * p.weight.transpose();
    if (p.bias.size() > 0) y.rowwise() += p.bias.row(0);
    return y;
}

// Accumulates weight/bias gradients into g and returns d_input.
Matrix linear_backward(const Matrix& x, const Matrix& d_out, const LinearParams& p,
                       LinearParams& g) {
    g.weight.noalias() += d_out.transpose() * x;
    if (g.bias.size() > 0) g.bias.row(0) += d_out.colwise().sum();
    return d_out * p.weight;
}

struct LayerNormCache {
    Matrix normalized;  // x_hat
    Eigen::VectorXd inv_std;
};

Matrix layer_norm(const Matrix& x, const LayerNormParams& p, LayerNormCache* cache) {
    const auto n = x.cols();
    Matrix x_hat(x.rows(), n);
    Eigen::VectorXd inv_std(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mean = x.row(r).mean();
        const double var = (x.row(r).array() - mean).square().mean();
        inv_std(r) = 1.0 / std::sqrt(var + kLayerNormEps);
        x_hat.row(r) = (x.row(r).array() - mean) * inv_std(r);
    }
    Matrix y = x_hat.array().rowwise() * p.gain.row(0).array();
    y.rowwise() += p.bias.row(0);
    if (cache != nullptr) {
        cache->normalized = std::move(x_hat);
        cache->inv_std = std::move(inv_std);
    }
    return y;
}

Matrix layer_norm_backward(const LayerNormCache& cache, const Matrix& d_out,
                           const LayerNormParams& p, LayerNormParams& g) {
    g.gain.row(0) += (d_out.array() * cache.normalized.array()).colwise().sum().matrix();
    g.bias.row(0) += d_out.colwise().sum();
    Matrix d_hat = d_out.array().rowwise() * p.gain.row(0).array();
    Matrix d_x(d_out.rows(), d_out.cols());
    for (Eigen::Index r = 0; r < d_out.rows(); ++r) {
        const double mean_d = d_hat.row(r).mean();
        const double mean_dx = d_hat.row(r).dot(cache.normalized.row(r)) /
                               static_cast<double>(d_out.cols());
        d_x.row(r) = cache.inv_std(r) * (d_hat.row(r).array() - mean_d -
                                         cache.normalized.row(r).array() * mean_dx);
    }
    return d_x;
}

void uniform_fill(Matrix& m, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

LinearParams make_linear(int in, int out, bool bias) {
    LinearParams p;
    p.weight = Matrix::Zero(out, in);
    if (bias) p.bias = Matrix::Zero(1, out);
    return p;
}

void init_linear(LinearParams& p, std::mt19937_64& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(p.weight.cols()));
    uniform_fill(p.weight, bound, rng);
    if (p.bias.size() > 0) uniform_fill(p.bias, bound, rng);
}

template <typename Params, typename Fn>
void visit_tensors(Params& p, Fn&& fn) {
    auto visit_linear = [&](const std::string& name, auto& lin) {
        fn(name + ".weight", lin.weight);
        if (lin.bias.size() > 0) fn(name + ".bias", lin.bias);
    };
    visit_linear("embed", p.embed);
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        auto& b = p.blocks[i];
        const std::string pre = "blocks." + std::to_string(i) + ".";
        visit_linear(pre + "ssm.delta_proj", b.ssm.delta_proj);
        fn(pre + "ssm.b_proj", b.ssm.b_proj);
        fn(pre + "ssm.c_proj", b.ssm.c_proj);
        fn(pre + "ssm.a_log", b.ssm.a_log);
        fn(pre + "ssm.skip", b.ssm.skip);
        fn(pre + "norm_in.gain", b.norm_in.gain);
        fn(pre + "norm_in.bias", b.norm_in.bias);
        visit_linear(pre + "attention.query", b.attention.query);
        visit_linear(pre + "attention.key", b.attention.key);
        visit_linear(pre + "attention.value", b.attention.value);
        visit_linear(pre + "attention.output", b.attention.output);
        fn(pre + "norm_out.gain", b.norm_out.gain);
        fn(pre + "norm_out.bias", b.norm_out.bias);
        visit_linear(pre + "ffn.up", b.ffn.up);
        visit_linear(pre + "ffn.down", b.ffn.down);
    }
    visit_linear("head", p.head);
}

}  // namespace

void ModelConfig::validate() const {
    if (blocks <= 0 || window < 2 || d_model <= 0 || d_state <= 0 || heads <= 0 || d_ff <= 0) {
        throw std::invalid_argument("model sizes must be positive and window >= 2");
    }
    if (d_model % heads != 0) {
        throw std::invalid_argument("d_model must be divisible by the number of heads");
    }
}

ModelParams ModelParams::zeros(const ModelConfig& cfg) {
    cfg.validate();
    const int d = cfg.d_model;
    ModelParams p;
    p.config = cfg;
    p.embed = make_linear(4, d, true);
    p.blocks.resize(static_cast<std::size_t>(cfg.blocks));
    for (auto& b : p.blocks) {
        b.ssm.delta_proj = make_linear(d, d, true);
        b.ssm.b_proj = Matrix::Zero(cfg.d_state, d);
        b.ssm.c_proj = Matrix::Zero(cfg.d_state, d);
        b.ssm.a_log = Matrix::Zero(d, cfg.d_state);
        b.ssm.skip = Matrix::Zero(1, d);
        b.norm_in = {Matrix::Zero(1, d), Matrix::Zero(1, d)};
        b.attention.query = make_linear(d, d, true);
        b.attention.key = make_linear(d, d, true);
        b.attention.value = make_linear(d, d, true);
        b.attention.output = make_linear(d, d, true);
        b.norm_out = {Matrix::Zero(1, d), Matrix::Zero(1, d)};
        b.ffn.up = make_linear(d, cfg.d_ff, true);
        b.ffn.down = make_linear(cfg.d_ff, d, true);
    }
    p.head = make_linear(d, 4, true);
    return p;
}

ModelParams ModelParams::initialize(const ModelConfig& cfg, std::uint64_t seed) {
    ModelParams p = zeros(cfg);
    std::mt19937_64 rng(seed);
    init_linear(p.embed, rng);
    for (auto& b : p.blocks) {
        init_linear(b.ssm.delta_proj, rng);
        const double bound = 1.0 / std::sqrt(static_cast<double>(cfg.d_model));
        uniform_fill(b.ssm.b_proj, bound, rng);
        uniform_fill(b.ssm.c_proj, bound, rng);
        for (int c = 0; c < cfg.d_model; ++c) {
            for (int n = 0; n < cfg.d_state; ++n) b.ssm.a_log(c, n) = std::log(n + 1.0);
        }
        b.ssm.skip.setOnes();
        b.norm_in.gain.setOnes();
        init_linear(b.attention.query, rng);
        init_linear(b.attention.key, rng);
        init_linear(b.attention.value, rng);
        init_linear(b.attention.output, rng);
        b.norm_out.gain.setOnes();
        init_linear(b.ffn.up, rng);
        init_linear(b.ffn.down, rng);
    }
    init_linear(p.head, rng);
    return p;
}

void ModelParams::for_each_tensor(const std::function<void(const std::string&, Matrix&)>& fn) {
    visit_tensors(*this, fn);
}

void ModelParams::for_each_tensor(
    const std::function<void(const std::string&, const Matrix&)>& fn) const {
    visit_tensors(*this, fn);
}

std::size_t ModelParams::parameter_count() const {
    std::size_t n = 0;
    for_each_tensor([&](const std::string&, const Matrix& m) { n += static_cast<std::size_t>(m.size()); });
    return n;
}

bool ModelParams::all_finite() const {
    bool ok = true;
    for_each_tensor([&](const std::string&, const Matrix& m) { ok = ok && m.allFinite(); });
    return ok;
}

void add_scaled(ModelParams& target, const ModelParams& source, double scale) {
    std::vector<const Matrix*> src;
    source.for_each_tensor([&](const std::string&, const Matrix& m) { src.push_back(&m); });
    std::size_t i = 0;
    target.for_each_tensor([&](const std::string&, Matrix& m) { m += scale * *src[i++]; });
}

void scale_all(ModelParams& target, double scale) {
    target.for_each_tensor([&](const std::string&, Matrix& m) { m *= scale; });
}

std::size_t TrackletWindow::valid_count() const {
    std::size_t n = 0;
    for (bool m : mask) n += m ? 1 : 0;
    return n;
}

TrackletWindow TrackletWindow::from_history(const std::vector<BoundingBox>& history,
                                            std::size_t length) {
    TrackletWindow w;
    w.boxes.assign(length, BoundingBox{});
    w.mask.assign(length, false);
    const std::size_t take = std::min(length, history.size());
    const std::size_t offset = length - take;
    for (std::size_t i = 0; i < take; ++i) {
        w.boxes[offset + i] = history[history.size() - take + i];
        w.mask[offset + i] = true;
    }
    return w;
}

double gelu(double u) { return 0.5 * u * (1.0 + std::erf(u / std::numbers::sqrt2)); }

// ---------------------------------------------------------------------------
// Forward with cache

struct SsmCache {
    Matrix input;        // T x d
    Matrix delta_pre;    // T x d, before softplus
    Matrix delta;        // T x d
    Matrix b;            // T x N
    Matrix c;            // T x N
    Matrix a;            // d x N, negative
    std::vector<Matrix> decay;   // per step exp(delta A), d x N
    std::vector<Matrix> states;  // per step h_k, d x N
};

struct AttentionCache {
    Matrix q, k, v;                  // T x d
    std::vector<Matrix> probs;       // per head T x T
    Matrix concat;                   // T x d
};

struct BlockCache {
    SsmCache ssm;
    LayerNormCache norm_in;
    Matrix y_ln;
    AttentionCache attention;
    LayerNormCache norm_out;
    Matrix x_att;
    Matrix up_pre;  // T x d_ff
    Matrix up_act;  // T x d_ff
};

struct ForwardTrace {
    Matrix tokens;  // T x 4, valid steps only
    Matrix embedded;
    std::vector<BlockCache> blocks;
    RowVector last;     // 1 x d
    RowVector output;   // sigmoid output
};

namespace {

Matrix scan_impl(const Matrix& x, const Matrix& delta, const Matrix& a, const Matrix& b,
                 const Matrix& c, const Matrix& skip, SsmCache* cache) {
    const Eigen::Index steps = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index n_state = a.cols();
    Matrix y(steps, d);
    Matrix h = Matrix::Zero(d, n_state);
    if (cache != nullptr) {
        cache->decay.resize(static_cast<std::size_t>(steps));
        cache->states.resize(static_cast<std::size_t>(steps));
    }
    for (Eigen::Index k = 0; k < steps; ++k) {
        Matrix decay = (a.array().colwise() * delta.row(k).transpose().array()).exp().matrix();
        // input term: delta_k[c] * x_k[c] * B_k[n]
        const Eigen::VectorXd drive = (delta.row(k).array() * x.row(k).array()).transpose();
        h = (decay.array() * h.array()).matrix() + drive * b.row(k);
        y.row(k) = (h * c.row(k).transpose()).transpose();
        y.row(k).array() += skip.row(0).array() * x.row(k).array();
        if (cache != nullptr) {
            cache->decay[static_cast<std::size_t>(k)] = std::move(decay);
            cache->states[static_cast<std::size_t>(k)] = h;
        }
    }
    return y;
}

Matrix ssm_impl(const Matrix& x, const SsmParams& p, SsmCache* cache) {
    Matrix delta_pre = linear(x, p.delta_proj);
    Matrix delta = delta_pre.unaryExpr([](double z) { return softplus(z); });
    Matrix b = x * p.b_proj.transpose();
    Matrix c = x * p.c_proj.transpose();
    Matrix a = -p.a_log.array().exp().matrix();
    Matrix y = scan_impl(x, delta, a, b, c, p.skip, cache);
    if (cache != nullptr) {
        cache->input = x;
        cache->delta_pre = std::move(delta_pre);
        cache->delta = std::move(delta);
        cache->b = std::move(b);
        cache->c = std::move(c);
        cache->a = std::move(a);
    }
    return y;
}

Matrix attention_impl(const Matrix& y_ln, const AttentionParams& p, int heads,
                      AttentionCache* cache) {
    const Eigen::Index steps = y_ln.rows();
    const Eigen::Index d = y_ln.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
    Matrix q = linear(y_ln, p.query);
    Matrix k = linear(y_ln, p.key);
    Matrix v = linear(y_ln, p.value);
    Matrix concat(steps, d);
    std::vector<Matrix> probs(static_cast<std::size_t>(heads));
    for (int hd = 0; hd < heads; ++hd) {
        const auto qh = q.middleCols(hd * dh, dh);
        const auto kh = k.middleCols(hd * dh, dh);
        const auto vh = v.middleCols(hd * dh, dh);
        Matrix s = (qh * kh.transpose()) * scale;
        Matrix& prob = probs[static_cast<std::size_t>(hd)];
        prob = Matrix::Zero(steps, steps);
        for (Eigen::Index i = 0; i < steps; ++i) {
            const double mx = s.row(i).head(i + 1).maxCoeff();
            double total = 0.0;
            for (Eigen::Index j = 0; j <= i; ++j) {
                prob(i, j) = std::exp(s(i, j) - mx);
                total += prob(i, j);
            }
            prob.row(i).head(i + 1) /= total;
        }
        concat.middleCols(hd * dh, dh).noalias() = prob * vh;
    }
    Matrix out = linear(concat, p.output);
    if (cache != nullptr) {
        cache->q = std::move(q);
        cache->k = std::move(k);
        cache->v = std::move(v);
        cache->concat = std::move(concat);
        cache->probs = std::move(probs);
    } else {
        (void)probs;
    }
    return out;
}

Matrix block_forward(const Matrix& x, const BlockParams& p, int heads, BlockCache* cache,
                     std::vector<Matrix>* attention_out) {
    Matrix y = ssm_impl(x, p.ssm, cache ? &cache->ssm : nullptr);
    LayerNormCache ln_in;
    Matrix y_ln = layer_norm(y, p.norm_in, &ln_in);
    AttentionCache att;
    Matrix z = attention_impl(y_ln, p.attention, heads, &att) + y_ln;
    LayerNormCache ln_out;
    Matrix x_att = layer_norm(z, p.norm_out, &ln_out);
    Matrix up_pre = linear(x_att, p.ffn.up);
    Matrix up_act = up_pre.unaryExpr([](double u) { return gelu(u); });
    Matrix out = linear(up_act, p.ffn.down) + x_att;
    if (attention_out != nullptr) *attention_out = att.probs;
    if (cache != nullptr) {
        cache->norm_in = std::move(ln_in);
        cache->y_ln = std::move(y_ln);
        cache->attention = std::move(att);
        cache->norm_out = std::move(ln_out);
        cache->x_att = std::move(x_att);
        cache->up_pre = std::move(up_pre);
        cache->up_act = std::move(up_act);
    }
    return out;
}

Matrix gather_tokens(const TrackletWindow& window) {
    if (window.boxes.size() != window.mask.size()) {
        throw std::invalid_argument("window boxes and mask differ in length");
    }
    const std::size_t valid = window.valid_count();
    if (valid < 2) throw std::invalid_argument("window needs at least 2 valid steps");
    Matrix tokens(static_cast<Eigen::Index>(valid), 4);
    Eigen::Index r = 0;
    for (std::size_t i = 0; i < window.boxes.size(); ++i) {
        if (!window.mask[i]) continue;
        const auto& b = window.boxes[i];
        tokens.row(r++) << b.x, b.y, b.w, b.h;
    }
    if (!tokens.allFinite()) throw std::invalid_argument("window contains non-finite values");
    return tokens;
}

void check_finite_input(const Matrix& x) {
    if (x.rows() == 0) throw std::invalid_argument("empty sequence");
    if (!x.allFinite()) throw std::invalid_argument("non-finite input");
}

}  // namespace

Matrix selective_scan(const Matrix& x, const Matrix& delta, const Matrix& a, const Matrix& b,
                      const Matrix& c, const Matrix& skip) {
    check_finite_input(x);
    return scan_impl(x, delta, a, b, c, skip, nullptr);
}

Matrix ssm_forward(const Matrix& x, const SsmParams& params) {
    check_finite_input(x);
    return ssm_impl(x, params, nullptr);
}

Matrix mhsa_forward(const Matrix& y, const BlockParams& params, int heads,
                    std::vector<Matrix>* attention) {
    if (heads <= 0 || y.cols() % heads != 0) {
        throw std::invalid_argument("d_model must be divisible by the number of heads");
    }
    Matrix y_ln = layer_norm(y, params.norm_in, nullptr);
    AttentionCache att;
    Matrix z = attention_impl(y_ln, params.attention, heads, &att) + y_ln;
    if (attention != nullptr) *attention = std::move(att.probs);
    return layer_norm(z, params.norm_out, nullptr);
}

Matrix ffn_forward(const Matrix& x, const FfnParams& params) {
    Matrix up = linear(x, params.up).unaryExpr([](double u) { return gelu(u); });
    return linear(up, params.down) + x;
}

ForwardResult forward(const TrackletWindow& window, const ModelParams& params) {
    auto trace = std::make_shared<ForwardTrace>();
    trace->tokens = gather_tokens(window);
    trace->embedded = linear(trace->tokens, params.embed);
    trace->blocks.resize(params.blocks.size());
    Matrix x = trace->embedded;
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        x = block_forward(x, params.blocks[i], params.config.heads, &trace->blocks[i], nullptr);
    }
    trace->last = x.row(x.rows() - 1);
    RowVector logits = trace->last * params.head.weight.transpose() + params.head.bias.row(0);
    trace->output = logits.unaryExpr([](double z) { return sigmoid(z); });
    ForwardResult result;
    result.prediction.box = {trace->output(0), trace->output(1), trace->output(2), trace->output(3)};
    result.trace = std::move(trace);
    return result;
}

PredictedBox predict(const TrackletWindow& window, const ModelParams& params) {
    Matrix x = linear(gather_tokens(window), params.embed);
    for (const auto& block : params.blocks) {
        x = block_forward(x, block, params.config.heads, nullptr, nullptr);
    }
    RowVector logits = x.row(x.rows() - 1) * params.head.weight.transpose() + params.head.bias.row(0);
    return {{sigmoid(logits(0)), sigmoid(logits(1)), sigmoid(logits(2)), sigmoid(logits(3))}};
}

// ---------------------------------------------------------------------------
// Backward

namespace {

Matrix ssm_backward(const SsmCache& cache, const Matrix& d_y, const SsmParams& p, SsmParams& g) {
    const Matrix& x = cache.input;
    const Eigen::Index steps = x.rows();
    const Eigen::Index d = x.cols();
    const Eigen::Index n_state = cache.a.cols();

    Matrix d_x = (d_y.array().rowwise() * p.skip.row(0).array()).matrix();
    g.skip.row(0) += (d_y.array() * x.array()).colwise().sum().matrix();

    Matrix d_delta = Matrix::Zero(steps, d);
    Matrix d_b = Matrix::Zero(steps, n_state);
    Matrix d_c = Matrix::Zero(steps, n_state);
    Matrix d_a = Matrix::Zero(d, n_state);
    Matrix g_h = Matrix::Zero(d, n_state);
    const Matrix zero_state = Matrix::Zero(d, n_state);

    for (Eigen::Index k = steps - 1; k >= 0; --k) {
        const auto ks = static_cast<std::size_t>(k);
        const Matrix& h = cache.states[ks];
        const Matrix& h_prev = k > 0 ? cache.states[ks - 1] : zero_state;
        const Matrix& decay = cache.decay[ks];
        // y_k = h_k c_k
        g_h.noalias() += d_y.row(k).transpose() * cache.c.row(k);
        d_c.row(k) = d_y.row(k) * h;
        // h_k = decay * h_prev + (delta_k x_k) b_k
        const Matrix decay_h = (decay.array() * h_prev.array()).matrix();
        const Matrix gh_decay_h = (g_h.array() * decay_h.array()).matrix();
        // d decay/d delta = A * decay; d decay/d A = delta * decay
        const Eigen::VectorXd from_decay = (gh_decay_h.array() * cache.a.array()).rowwise().sum();
        const Eigen::VectorXd gh_b = g_h * cache.b.row(k).transpose();  // d
        for (Eigen::Index c = 0; c < d; ++c) {
            d_delta(k, c) += from_decay(c) + gh_b(c) * x(k, c);
            d_x(k, c) += gh_b(c) * cache.delta(k, c);
        }
        d_a += (gh_decay_h.array().colwise() * cache.delta.row(k).transpose().array()).matrix();
        const Eigen::VectorXd drive = (cache.delta.row(k).array() * x.row(k).array()).transpose();
        d_b.row(k) = drive.transpose() * g_h;
        g_h = (g_h.array() * decay.array()).matrix();
    }

    // A = -exp(a_log)  =>  dA/da_log = A
    g.a_log += (d_a.array() * cache.a.array()).matrix();
    Matrix d_pre = (d_delta.array() *
                    cache.delta_pre.unaryExpr([](double z) { return sigmoid(z); }).array())
                       .matrix();
    d_x += linear_backward(x, d_pre, p.delta_proj, g.delta_proj);
    g.b_proj.noalias() += d_b.transpose() * x;
    d_x.noalias() += d_b * p.b_proj;
    g.c_proj.noalias() += d_c.transpose() * x;
    d_x.noalias() += d_c * p.c_proj;
    return d_x;
}

Matrix attention_backward(const AttentionCache& cache, const Matrix& y_ln, const Matrix& d_out,
                          const AttentionParams& p, AttentionParams& g, int heads) {
    const Eigen::Index steps = y_ln.rows();
    const Eigen::Index d = y_ln.cols();
    const Eigen::Index dh = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

    Matrix d_concat = linear_backward(cache.concat, d_out, p.output, g.output);
    Matrix d_q(steps, d), d_k(steps, d), d_v(steps, d);
    for (int hd = 0; hd < heads; ++hd) {
        const Matrix& prob = cache.probs[static_cast<std::size_t>(hd)];
        const auto qh = cache.q.middleCols(hd * dh, dh);
        const auto kh = cache.k.middleCols(hd * dh, dh);
        const auto vh = cache.v.middleCols(hd * dh, dh);
        const auto d_oh = d_concat.middleCols(hd * dh, dh);
        Matrix d_prob = d_oh * vh.transpose();
        d_v.middleCols(hd * dh, dh).noalias() = prob.transpose() * d_oh;
        const Eigen::VectorXd row_dot = (d_prob.array() * prob.array()).rowwise().sum();
        Matrix d_s = (prob.array() * (d_prob.array().colwise() - row_dot.array())).matrix() * scale;
        d_q.middleCols(hd * dh, dh).noalias() = d_s * kh;
        d_k.middleCols(hd * dh, dh).noalias() = d_s.transpose() * qh;
    }
    Matrix d_in = linear_backward(y_ln, d_q, p.query, g.query);
    d_in += linear_backward(y_ln, d_k, p.key, g.key);
    d_in += linear_backward(y_ln, d_v, p.value, g.value);
    return d_in;
}

Matrix block_backward(const BlockCache& cache, const Matrix& d_out, const BlockParams& p,
                      BlockParams& g, int heads) {
    // out = down(gelu(up(x_att))) + x_att
    Matrix d_act = linear_backward(cache.up_act, d_out, p.ffn.down, g.ffn.down);
    Matrix d_up = (d_act.array() *
                   cache.up_pre.unaryExpr([](double u) { return gelu_grad(u); }).array())
                      .matrix();
    Matrix d_x_att = linear_backward(cache.x_att, d_up, p.ffn.up, g.ffn.up) + d_out;
    // x_att = LN(attn(y_ln) + y_ln)
    Matrix d_z = layer_norm_backward(cache.norm_out, d_x_att, p.norm_out, g.norm_out);
    Matrix d_y_ln = attention_backward(cache.attention, cache.y_ln, d_z, p.attention, g.attention,
                                       heads) +
                    d_z;
    Matrix d_y = layer_norm_backward(cache.norm_in, d_y_ln, p.norm_in, g.norm_in);
    return ssm_backward(cache.ssm, d_y, p.ssm, g.ssm);
}

}  // namespace

ModelGradients backward(const ForwardResult& result, const ModelParams& params,
                        const std::array<double, 4>& d_prediction) {
    ModelGradients g = ModelParams::zeros(params.config);
    backward_accumulate(result, params, d_prediction, g);
    return g;
}

void backward_accumulate(const ForwardResult& result, const ModelParams& params,
                         const std::array<double, 4>& d_prediction, ModelGradients& g) {
    const ForwardTrace& trace = *result.trace;

    RowVector d_logits(4);
    for (int i = 0; i < 4; ++i) {
        const double s = trace.output(i);
        d_logits(i) = d_prediction[static_cast<std::size_t>(i)] * s * (1.0 - s);
    }
    g.head.weight += d_logits.transpose() * trace.last;
    g.head.bias.row(0) += d_logits;

    Matrix d_x = Matrix::Zero(trace.tokens.rows(), params.config.d_model);
    d_x.row(d_x.rows() - 1) = d_logits * params.head.weight;
    for (std::size_t i = params.blocks.size(); i-- > 0;) {
        d_x = block_backward(trace.blocks[i], d_x, params.blocks[i], g.blocks[i],
                             params.config.heads);
    }
    linear_backward(trace.tokens, d_x, params.embed, g.embed);
}

}  // namespace playtrack
