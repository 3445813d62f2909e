#include <benchmark/benchmark.h>

#include <random>

#include "combsim/exact.hpp"
#include "combsim/experiments.hpp"

namespace {

combsim::Operator4 random_hermitian(std::mt19937& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  combsim::Operator4 m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = std::complex<double>(g(rng), g(rng));
  return combsim::Operator4(0.5 * (m + m.adjoint()));
}

void BM_Expm4(benchmark::State& state) {
  std::mt19937 rng(7);
  const combsim::Operator4 h = random_hermitian(rng);
  for (auto _ : state) benchmark::DoNotOptimize(combsim::expm_unitary(h, 0.37));
}
BENCHMARK(BM_Expm4);

void BM_SliceCacheBuild(benchmark::State& state) {
  const combsim::SpinSystem sys = combsim::glycine_reference();
  const combsim::CrystalliteOrientation cr{0.3, 1.1, 2.0, 1.0};
  const combsim::FourierHamiltonian fh = combsim::fourier_coeffs(sys, cr);
  const double wr = sys.omega_r();
  for (auto _ : state) {
    combsim::SliceCache cache(fh, 3.5 * wr, 0.0, 2.5 * wr, 0.0, 0.0, 0.0,
                              static_cast<int>(state.range(0)), 4096);
    benchmark::DoNotOptimize(cache.period());
  }
}
BENCHMARK(BM_SliceCacheBuild)->Arg(64)->Arg(128);

void BM_SequenceEval(benchmark::State& state) {
  const combsim::SpinSystem sys = combsim::glycine_reference();
  const combsim::CrystalliteOrientation cr{0.3, 1.1, 2.0, 1.0};
  const combsim::SequenceDescriptor seq = combsim::sequence_by_name("comb3dcp");
  const combsim::ExactSequenceEvaluator ev(sys, cr, seq, combsim::MatchSpec{},
                                           combsim::RfErrorSpec{}, combsim::ChannelMult{},
                                           combsim::PulseModel{}, 512);
  for (auto _ : state) benchmark::DoNotOptimize(ev.efficiency(320));
}
BENCHMARK(BM_SequenceEval);

void BM_PowderCurve(benchmark::State& state) {
  combsim::ExperimentConfig cfg;
  cfg.sequence = "dcp";
  cfg.powder = "zcw3:55";
  cfg.time_points = 8;
  for (auto _ : state)
    benchmark::DoNotOptimize(combsim::run_efficiency_vs_time(cfg).curves[0].peak_eff);
}
BENCHMARK(BM_PowderCurve);

}  // namespace

BENCHMARK_MAIN();
