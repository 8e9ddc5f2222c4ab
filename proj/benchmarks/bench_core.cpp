#include <benchmark/benchmark.h>

#include "spde/analysis.hpp"
#include "spde/experiments.hpp"

using namespace spde;

namespace {

void BM_BandedSolve(benchmark::State& state) {
  const GridSpec g = build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const BandMatrix m = BandMatrix::identity(g.unknowns()) + 0.01 * assemble_biharmonic(g);
  const Vector rhs(g.unknowns(), 1.0);
  for (auto _ : state) {
    BandedLU lu(m);
    benchmark::DoNotOptimize(lu.solve(rhs));
  }
}
BENCHMARK(BM_BandedSolve)->Arg(64)->Arg(256)->Arg(1024);

void BM_ImplicitStep(benchmark::State& state) {
  const GridSpec g = build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const Stepper stepper(p, SchemeConfig{});
  auto rng = path_rng(1, 0);
  const Vector dw = sample_wiener_increments(rng, p.state_dim(), 1.0 / 500);
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(u0, dw));
}
BENCHMARK(BM_ImplicitStep)->Arg(32)->Arg(128)->Arg(512);

void BM_ImexStep(benchmark::State& state) {
  const GridSpec g = build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const SemiDiscreteProblem p = make_cahn_hilliard(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  SchemeConfig c;
  c.scheme = Scheme::kThetaImex;
  const Stepper stepper(p, c);
  const Vector dw(p.state_dim(), 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(stepper.step(u0, dw));
}
BENCHMARK(BM_ImexStep)->Arg(32)->Arg(128)->Arg(512);

void BM_SpectralNorm(benchmark::State& state) {
  const GridSpec g = build_grid(0.0, 1.0, static_cast<std::size_t>(state.range(0)));
  const BandMatrix a = assemble_neg_laplacian(g);
  for (auto _ : state) benchmark::DoNotOptimize(spectral_norm(a));
}
BENCHMARK(BM_SpectralNorm)->Arg(64)->Arg(256);

void BM_RunMsd(benchmark::State& state) {
  const GridSpec g = build_grid(0.0, 1.0, 32);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::Additive{0.1});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  SchemeConfig c;
  c.n_steps = 100;
  for (auto _ : state) benchmark::DoNotOptimize(run_msd(p, c, u0, y0, 16));
}
BENCHMARK(BM_RunMsd)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
