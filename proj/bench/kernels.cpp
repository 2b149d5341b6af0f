// Serial vs parallel timings for the two OpenMP kernels: the derivative
// bundle (parallel over the p multiplier directions) and the frequency sweep.
#include <benchmark/benchmark.h>

#include <map>

#include "kyp/riccati_calculus.hpp"
#include "kyp/synthesis.hpp"
#include "kyp/verification.hpp"

using namespace kyp;

namespace {

struct Fixture {
  KypProblem prob;
  Vector lambda;
  RiccatiPair pair;
};

// Chain of k masses with a force on every mass, so p = k. λ is shrunk until it
// lands in the domain.
const Fixture& fixture(int k) {
  static std::map<int, Fixture> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    const ChainPlant chain = generate_mass_spring_chain(k);
    Matrix B1 = Matrix::Zero(2 * k, k);
    B1.bottomRows(k) = Matrix::Identity(k, k);
    Fixture f;
    f.prob = assemble_kyp_sdp(build_actuator_uncertainty(chain.A, B1, 0.25));
    for (double lam = 1e-3;; lam *= 0.1) {
      try {
        f.lambda = Vector::Constant(k, lam);
        f.pair = compute_pair(f.prob, f.lambda);
        break;
      } catch (const KypError&) {
        if (lam < 1e-12) throw;
      }
    }
    it = cache.emplace(k, std::move(f)).first;
  }
  return it->second;
}

void BM_Derivatives(benchmark::State& state, Exec exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(compute_derivatives(f.prob, f.pair, exec));
  }
}

void BM_FrequencySweep(benchmark::State& state, Exec exec) {
  const Fixture& f = fixture(static_cast<int>(state.range(0)));
  const std::vector<double> grid = log_frequency_grid(400, 1e-3, 1e3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(check_frequency_domain(f.prob, f.lambda, grid, true, exec));
  }
}

}  // namespace

BENCHMARK_CAPTURE(BM_Derivatives, serial, Exec::serial)
    ->Arg(4)->Arg(8)->Arg(16)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Derivatives, parallel, Exec::parallel)
    ->Arg(4)->Arg(8)->Arg(16)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FrequencySweep, serial, Exec::serial)
    ->Arg(4)->Arg(16)
    ->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_FrequencySweep, parallel, Exec::parallel)
    ->Arg(4)->Arg(16)
    ->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
