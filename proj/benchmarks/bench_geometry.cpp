#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "playtrack/geometry.hpp"

using namespace playtrack;

namespace {

std::vector<BoundingBox> random_boxes(std::size_t n) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> pos(0.0, 600.0), size(20.0, 160.0);
    std::vector<BoundingBox> out(n);
    for (auto& b : out) b = {pos(rng), pos(rng), size(rng) * 0.4, size(rng)};
    return out;
}

void BM_Similarity(benchmark::State& state) {
    const auto metric = static_cast<SimilarityMetric>(state.range(0));
    const auto boxes = random_boxes(256);
    double sink = 0.0;
    for (auto _ : state) {
        for (std::size_t i = 0; i + 1 < boxes.size(); ++i) sink += similarity(metric, boxes[i], boxes[i + 1], 0.4);
        benchmark::DoNotOptimize(sink);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(boxes.size() - 1));
    state.SetLabel(to_string(metric));
}
BENCHMARK(BM_Similarity)->DenseRange(0, 3);

void BM_CiouWithGrad(benchmark::State& state) {
    const auto boxes = random_boxes(256);
    double sink = 0.0;
    for (auto _ : state) {
        for (std::size_t i = 0; i + 1 < boxes.size(); ++i) sink += ciou_loss_with_grad(boxes[i], boxes[i + 1]).grad[0];
        benchmark::DoNotOptimize(sink);
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(boxes.size() - 1));
}
BENCHMARK(BM_CiouWithGrad);

}  // namespace
