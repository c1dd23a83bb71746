// Serial reference vs OpenMP Schur-complement assembly on the blocks of a
// real reduction program, plus full solves with each kernel.

#include <map>
#include <random>

#include <benchmark/benchmark.h>

#include "h2net/reduction.hpp"
#include "h2net/schur_kernel.hpp"

using namespace h2net;

namespace {

struct Fixture {
  ReductionProgram prog;
  std::vector<Matrix> zinv, x;
  std::vector<sdp::SchurBlock> blocks;

  explicit Fixture(Index n) {
    const SecondOrderNetwork net = build_grounded_system(generate_powerlaw_cluster(n, 2, 0.5, 7));
    prog = formulate_sdp(net, 2);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    for (const auto& b : prog.lmi.blocks) {
      Matrix A(b.dim, b.dim), B(b.dim, b.dim);
      for (Index i = 0; i < A.size(); ++i) {
        A.data()[i] = g(rng);
        B.data()[i] = g(rng);
      }
      zinv.push_back(A * A.transpose() + Matrix::Identity(b.dim, b.dim));
      x.push_back(B * B.transpose() + Matrix::Identity(b.dim, b.dim));
    }
    for (std::size_t k = 0; k < zinv.size(); ++k)
      blocks.push_back({&prog.lmi.blocks[k].coeffs, &zinv[k], &x[k]});
  }
};

const Fixture& fixture(Index n) {
  static std::map<Index, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, Fixture(n)).first;
  return it->second;
}

void BM_SchurSerial(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sdp::schur_complement_serial(f.blocks, f.prog.lmi.num_vars));
  state.counters["vars"] = static_cast<double>(f.prog.lmi.num_vars);
}

void BM_SchurParallel(benchmark::State& state) {
  const Fixture& f = fixture(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sdp::schur_complement_parallel(f.blocks, f.prog.lmi.num_vars));
  state.counters["vars"] = static_cast<double>(f.prog.lmi.num_vars);
}

void BM_Solve(benchmark::State& state, sdp::SchurKernelKind kind) {
  const SecondOrderNetwork net = build_grounded_system(generate_powerlaw_cluster(state.range(0), 2, 0.5, 7));
  const ReductionProgram prog = formulate_sdp(net, 2);
  sdp::SolverOptions opts;
  opts.kernel = kind;
  for (auto _ : state) benchmark::DoNotOptimize(sdp::solve(prog.lmi, opts));
}

}  // namespace

BENCHMARK(BM_SchurSerial)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SchurParallel)->Arg(8)->Arg(12)->Arg(16)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, serial, sdp::SchurKernelKind::Serial)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Solve, parallel, sdp::SchurKernelKind::Parallel)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
