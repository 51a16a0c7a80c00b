#include <benchmark/benchmark.h>

#include "tfn/core_math.hpp"
#include "tfn/nn/layers.hpp"
#include "tfn/nn/model.hpp"
#include "tfn/random.hpp"
#include "tfn/tfconv.hpp"

using namespace tfn;

namespace {

Tensor random_batch(std::size_t batch, std::size_t channels, std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    Tensor x(batch, channels, length);
    for (double& v : x.values()) v = rng.normal();
    return x;
}

void BM_Dft(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    Rng rng(1);
    std::vector<double> x(n);
    for (double& v : x) v = rng.normal();
    for (auto _ : state) benchmark::DoNotOptimize(dft(x));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Dft)->RangeMultiplier(4)->Range(64, 4096)->Complexity();

void BM_TfconvForward(benchmark::State& state) {
    const auto family = static_cast<KernelFamily>(state.range(0));
    const TfConvLayer layer = make_tfconv(family, 8, 0);
    const Tensor x = random_batch(64, 1, 1024, 2);
    for (auto _ : state) benchmark::DoNotOptimize(tfconv_forward(layer, x));
    state.SetLabel(std::string(to_string(family)));
}
BENCHMARK(BM_TfconvForward)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_TfconvBackward(benchmark::State& state) {
    const TfConvLayer layer = make_tfconv(KernelFamily::sttf, 8, 0);
    const Tensor x = random_batch(64, 1, 1024, 3);
    auto [y, cache] = tfconv_forward(layer, x);
    const Tensor g = random_batch(64, 8, 1024, 4);
    for (auto _ : state) benchmark::DoNotOptimize(tfconv_backward(layer, cache, g));
}
BENCHMARK(BM_TfconvBackward)->Unit(benchmark::kMillisecond);

void BM_ConvForwardBackward(benchmark::State& state) {
    const auto in = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    nn::Conv1d conv(in, 16, 15);
    conv.init(rng);
    const Tensor x = random_batch(64, in, 1024, 6);
    const Tensor g = random_batch(64, 16, 1010, 7);
    for (auto _ : state) {
        benchmark::DoNotOptimize(conv.forward(x, true));
        benchmark::DoNotOptimize(conv.backward(g));
    }
}
BENCHMARK(BM_ConvForwardBackward)->Arg(1)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
    nn::ModelSpec spec;
    spec.mode = state.range(0) ? nn::AssemblyMode::tfn_add : nn::AssemblyMode::backbone_only;
    nn::Model model = nn::assemble_model(spec, 0);
    const Tensor x = random_batch(64, 1, 1024, 8);
    for (auto _ : state) {
        const Tensor logits = model.forward(x, true);
        model.zero_grad();
        model.backward(Tensor(logits.shape(), 0.01));
    }
    state.SetLabel(std::string(nn::to_string(spec.mode)));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
