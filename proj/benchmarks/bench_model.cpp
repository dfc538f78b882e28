#include <benchmark/benchmark.h>

#include "playtrack/motion_model.hpp"

using namespace playtrack;

namespace {

TrackletWindow moving_window(int length) {
    std::vector<BoundingBox> history;
    for (int k = 0; k < length; ++k) history.push_back({0.3 + 0.004 * k, 0.5 - 0.002 * k, 0.03, 0.08});
    return TrackletWindow::from_history(history, 10);
}

// Arguments: blocks, d_model.
void BM_Predict(benchmark::State& state) {
    ModelConfig cfg;
    cfg.blocks = static_cast<int>(state.range(0));
    cfg.d_model = static_cast<int>(state.range(1));
    cfg.d_ff = 4 * cfg.d_model;
    const auto params = ModelParams::initialize(cfg, 1);
    const auto window = moving_window(10);
    for (auto _ : state) benchmark::DoNotOptimize(predict(window, params));
}
BENCHMARK(BM_Predict)->Args({1, 64})->Args({2, 64})->Args({4, 64})->Args({4, 32})->Unit(benchmark::kMicrosecond);

void BM_ForwardBackward(benchmark::State& state) {
    const auto params = ModelParams::initialize(ModelConfig{}, 1);
    const auto window = moving_window(10);
    auto grads = ModelParams::zeros(params.config);
    for (auto _ : state) {
        const auto result = forward(window, params);
        backward_accumulate(result, params, {1.0, 1.0, 1.0, 1.0}, grads);
    }
}
BENCHMARK(BM_ForwardBackward)->Unit(benchmark::kMicrosecond);

}  // namespace
