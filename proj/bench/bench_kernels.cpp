// Serial reference kernels against the OpenMP ones on the shapes training
// actually runs: batch 64, T = 128, d_model = 128, 4 heads, V = 65.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "tinylab/kernels.hpp"

using namespace tinylab;

namespace {

std::vector<Real> filled(std::size_t n) {
    std::mt19937 rng(7);
    std::normal_distribution<float> normal(0.0f, 1.0f);
    std::vector<Real> v(n);
    for (Real& x : v) x = static_cast<Real>(normal(rng));
    return v;
}

using Gemm = void (*)(std::span<const Real>, std::span<const Real>, std::span<Real>, std::size_t, std::size_t,
                      std::size_t, bool);

template <Gemm gemm>
void BM_Gemm(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto k = static_cast<std::size_t>(state.range(1));
    const auto n = static_cast<std::size_t>(state.range(2));
    const auto a = filled(m * k);
    const auto b = filled(k * n);
    std::vector<Real> c(m * n);
    for (auto _ : state) {
        gemm(a, b, c, m, k, n, false);
        benchmark::DoNotOptimize(c.data());
    }
    state.counters["GFLOP/s"] =
        benchmark::Counter(2.0 * m * k * n, benchmark::Counter::kIsIterationInvariantRate, benchmark::Counter::kIs1000);
}

// Rows = batch * T positions. Projections d x d, the feed-forward d x 256,
// the linear model's flattened head (T*d) x V.
void gemm_shapes(benchmark::internal::Benchmark* b) {
    b->Args({8192, 128, 128})->Args({8192, 128, 256})->Args({64, 16384, 65})->Unit(benchmark::kMillisecond);
}

BENCHMARK(BM_Gemm<kernels::serial::gemm_nn>)->Name("gemm_nn/serial")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<kernels::omp::gemm_nn>)->Name("gemm_nn/omp")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<kernels::serial::gemm_tn>)->Name("gemm_tn/serial")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<kernels::omp::gemm_tn>)->Name("gemm_tn/omp")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<kernels::serial::gemm_nt>)->Name("gemm_nt/serial")->Apply(gemm_shapes);
BENCHMARK(BM_Gemm<kernels::omp::gemm_nt>)->Name("gemm_nt/omp")->Apply(gemm_shapes);

template <bool parallel>
void BM_AttentionForward(benchmark::State& state) {
    const kernels::AttentionDims dims{64 * 4, static_cast<std::size_t>(state.range(0)), 32};
    const std::size_t n = dims.batch * dims.seq_len * dims.head_dim;
    const auto q = filled(n), k = filled(n), v = filled(n);
    std::vector<Real> probs(dims.batch * dims.seq_len * dims.seq_len), out(n);
    for (auto _ : state) {
        if constexpr (parallel) {
            kernels::omp::attention_forward(q, k, v, {}, dims, Real(0.17677669), probs, out);
        } else {
            kernels::serial::attention_forward(q, k, v, {}, dims, Real(0.17677669), probs, out);
        }
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool parallel>
void BM_AttentionBackward(benchmark::State& state) {
    const kernels::AttentionDims dims{64 * 4, static_cast<std::size_t>(state.range(0)), 32};
    const std::size_t n = dims.batch * dims.seq_len * dims.head_dim;
    const auto q = filled(n), k = filled(n), v = filled(n), dout = filled(n);
    std::vector<Real> probs(dims.batch * dims.seq_len * dims.seq_len), out(n), dq(n), dk(n), dv(n);
    kernels::serial::attention_forward(q, k, v, {}, dims, Real(0.17677669), probs, out);
    for (auto _ : state) {
        if constexpr (parallel) {
            kernels::omp::attention_backward(q, k, v, {}, probs, dout, dims, Real(0.17677669), dq, dk, dv);
        } else {
            kernels::serial::attention_backward(q, k, v, {}, probs, dout, dims, Real(0.17677669), dq, dk, dv);
        }
        benchmark::DoNotOptimize(dq.data());
    }
}

BENCHMARK(BM_AttentionForward<false>)->Name("attention_forward/serial")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttentionForward<true>)->Name("attention_forward/omp")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttentionBackward<false>)->Name("attention_backward/serial")->Arg(128)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_AttentionBackward<true>)->Name("attention_backward/omp")->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
