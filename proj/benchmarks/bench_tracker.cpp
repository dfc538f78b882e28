#include <benchmark/benchmark.h>

#include <memory>

#include "playtrack/predictor.hpp"
#include "playtrack/simulator.hpp"
#include "playtrack/tracker.hpp"

using namespace playtrack;

namespace {

// One pass over a 25-agent sequence; reports frames per second of Tracker::process.
void BM_TrackSequence(benchmark::State& state) {
    Scenario s;
    s.n_agents = 25;
    s.n_frames = 100;
    s.noise_sigma = 1.0;
    s.occlusion_rate = 0.3;
    const auto sim = generate(s);
    std::shared_ptr<const MotionPredictor> predictor;
    if (state.range(0) == 1) predictor = std::make_shared<LearnedPredictor>(ModelParams::initialize(ModelConfig{}, 1));
    for (auto _ : state) {
        Tracker tracker(TrackerConfig{}, AssociationConfig{},
                        predictor ? predictor : std::make_shared<ConstantVelocityPredictor>(),
                        sim.sequence.image_width, sim.sequence.image_height);
        for (int f = 1; f <= sim.sequence.last_frame(); ++f) {
            const auto it = sim.sequence.frames.find(f);
            benchmark::DoNotOptimize(
                tracker.process(f, it == sim.sequence.frames.end() ? std::vector<Detection>{} : it->second));
        }
    }
    state.counters["fps"] = benchmark::Counter(static_cast<double>(state.iterations()) * s.n_frames,
                                               benchmark::Counter::kIsRate);
    state.SetLabel(predictor ? "learned" : "constant-velocity");
}
BENCHMARK(BM_TrackSequence)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
