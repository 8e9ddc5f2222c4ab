#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "fixtures.hpp"
#include "spde/analysis.hpp"
#include "spde/error.hpp"
#include "spde/experiments.hpp"

using namespace spde;
namespace fs = std::filesystem;

namespace {

SchemeConfig config(double theta, double dt, std::size_t steps) {
  SchemeConfig c;
  c.theta = theta;
  c.dt = dt;
  c.n_steps = steps;
  c.newton_tol = 1e-13;
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("spde_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<ErrorCode> code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

}  // namespace

TEST_CASE("run_msd against per-path trajectories") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const SchemeConfig c = config(1.0, 0.002, 25);
  const std::size_t n = 7;
  const MsdEstimate est = run_msd(p, c, u0, y0, n, 2);
  REQUIRE(est.size() == 26);
  CHECK(est.n_paths == n);
  CHECK(est.blowup_fraction == 0.0);
  CHECK(est.msd[0] == deviation_sqnorm(u0, y0, NormScaling::kNone, g.dx));
  for (std::size_t k = 0; k < est.size(); ++k) CHECK(est.times[k] == doctest::Approx(k * c.dt));

  // Oracle: sample mean and standard error of |Z_k|^2 from the same paths.
  std::vector<PairTrajectory> paths;
  for (std::size_t i = 0; i < n; ++i) paths.push_back(simulate_pair(p, c, u0, y0, false, i));
  for (std::size_t k : {1u, 10u, 25u}) {
    double mean = 0.0;
    for (const auto& t : paths) mean += t.z_sqnorms[k];
    mean /= n;
    double var = 0.0;
    for (const auto& t : paths) var += std::pow(t.z_sqnorms[k] - mean, 2);
    var /= (n - 1);
    CHECK(est.msd[k] == doctest::Approx(mean).epsilon(1e-13));
    CHECK(est.std_error[k] == doctest::Approx(std::sqrt(var / n)).epsilon(1e-10));
  }
}

TEST_CASE("run_msd edge cases") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const SchemeConfig c = config(1.0, 0.002, 5);
  CHECK(code_of([&] { run_msd(p, c, u0, y0, 1); }) == ErrorCode::kInvalidArgument);
  const MsdEstimate same = run_msd(p, c, u0, u0, 3);
  for (double v : same.msd) CHECK(v == 0.0);
}

TEST_CASE("property: a linear problem with additive noise has zero standard error") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = fixture::linear_problem(g, noise::Additive{0.4}, 0.5);
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const MsdEstimate est = run_msd(p, config(1.0, 0.001, 40), u0, y0, 6);
  for (double s : est.std_error) CHECK(s == doctest::Approx(0.0).scale(est.msd[0]).epsilon(1e-12));
}

TEST_CASE("property: results do not depend on the worker count") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeQuadratic{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const SchemeConfig c = config(1.0, 0.002, 30);
  const MsdEstimate a = run_msd(p, c, u0, y0, 9, 1);
  for (std::size_t w : {2u, 3u, 8u}) {
    const MsdEstimate b = run_msd(p, c, u0, y0, 9, w);
    CHECK(a.msd == b.msd);
    CHECK(a.std_error == b.std_error);
  }
}

TEST_CASE("all paths blowing up is reported, not thrown") {
  const GridSpec g = build_grid(0.0, 1.0, 32);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const MsdEstimate est = run_msd(p, config(0.0, 0.01, 300), u0, y0, 4);
  CHECK(est.blowup_fraction == 1.0);
  CHECK(est.size() < 301);
  CHECK(est.size() >= 1);
  for (double v : est.msd) CHECK(std::isfinite(v));
}

TEST_CASE("dx sweep equals independent run_msd calls") {
  const SchemeConfig c = config(1.0, 0.002, 10);
  const ProblemFactory f = [](const GridSpec& g) {
    return make_ginzburg_landau(g, noise::Additive{0.2});
  };
  const std::vector<GridSpec> grids{build_grid(0, 1, 8), build_grid(0, 1, 16)};
  const auto sweep = run_dx_sweep(f, c, grids, 3, InitialCondition::sine());
  REQUIRE(sweep.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const SemiDiscreteProblem p = f(grids[i]);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    CHECK(sweep[i].msd == run_msd(p, c, u0, y0, 3).msd);
  }
  CHECK(code_of([&] { run_dx_sweep(f, c, std::span<const GridSpec>{}, 3, InitialCondition::sine()); }) ==
        ErrorCode::kEmptyInput);
}

TEST_CASE("initial profiles") {
  const GridSpec g = build_grid(0.0, 2.0, 8);
  const SemiDiscreteProblem p = make_uncoupled_system(g, noise::Additive{0.1});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine(2, 1.5, -0.5));
  REQUIRE(u0.size() == 14);
  for (std::size_t i = 0; i < 7; ++i) {
    const double xhat = (i + 1) / 8.0;
    for (std::size_t comp = 0; comp < 2; ++comp) {
      CHECK(u0[2 * i + comp] == doctest::Approx(1.5 * std::sin(2 * M_PI * xhat)));
      CHECK(y0[2 * i + comp] == doctest::Approx(-0.5 * std::sin(2 * M_PI * xhat)));
    }
  }
}

TEST_CASE("csv export and parse") {
  const fs::path dir = scratch_dir("csv");
  const GridSpec g = build_grid(0.0, 1.0, 8);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  const MsdEstimate est = run_msd(p, config(1.0, 0.01, 3), u0, y0, 4);
  export_csv(est, dir / "m.csv", "hello");

  const std::string text = slurp(dir / "m.csv");
  CHECK(text.rfind("# hello\nstep,time,msd,stderr\n", 0) == 0);
  int rows = 0;
  for (char ch : text) rows += ch == '\n';
  CHECK(rows == 2 + 4);

  const MsdEstimate back = parse_csv(dir / "m.csv");
  CHECK(back.msd == est.msd);
  CHECK(back.times == est.times);
  CHECK(back.std_error == est.std_error);

  CHECK(code_of([&] { export_csv(MsdEstimate{}, dir / "e.csv"); }) == ErrorCode::kEmptyInput);
  CHECK(code_of([&] { export_csv(est, dir / "missing" / "x.csv"); }) == ErrorCode::kIoError);
  CHECK(code_of([&] { parse_csv(dir / "nope.csv"); }) == ErrorCode::kIoError);
  fs::remove_all(dir);
}

TEST_CASE("gnuplot script") {
  const fs::path dir = scratch_dir("gp");
  const std::vector<PlotCurve> curves{{"a.csv", "n=16"}, {"b.csv", "n=32"}};
  export_plot_script(curves, dir / "p.gp", "sweep");
  const std::string s = slurp(dir / "p.gp");
  CHECK(s.find("set logscale y") != std::string::npos);
  CHECK(s.find("set datafile separator ','") != std::string::npos);
  CHECK(s.find("'a.csv' using 2:3") != std::string::npos);
  CHECK(s.find("'b.csv' using 2:3") != std::string::npos);
  CHECK(s.find("n=32") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("least squares") {
  const Vector x{0, 1, 2, 3};
  const Vector y{1, 3, 5, 7};
  const auto [slope, intercept] = least_squares_fit(x, y);
  CHECK(slope == doctest::Approx(2.0));
  CHECK(intercept == doctest::Approx(1.0));
  CHECK(code_of([] { least_squares_fit(Vector{1, 1}, Vector{0, 2}); }) ==
        ErrorCode::kDegenerateRegression);
}

TEST_CASE("strong order on problems with known rates") {
  SUBCASE("deterministic backward Euler is first order") {
    const GridSpec g = build_grid(0.0, 1.0, 16);
    const SemiDiscreteProblem p = fixture::linear_problem(g, noise::Additive{0.0}, 0.0);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    StrongOrderOptions o;
    o.final_time = 0.25;
    o.n_paths = 2;
    const Vector dts{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    const StrongOrderResult r = strong_order(p, config(1.0, 0.1, 1), u0, dts, o);
    CHECK(r.slope == doctest::Approx(1.0).epsilon(0.1));
    CHECK(r.reference_dt == doctest::Approx(1.0 / 1024));
    CHECK(r.errors.size() == 4);
  }
  SUBCASE("deterministic Crank-Nicolson is second order") {
    const GridSpec g = build_grid(0.0, 1.0, 16);
    const SemiDiscreteProblem p = fixture::linear_problem(g, noise::Additive{0.0}, 0.0);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    StrongOrderOptions o;
    o.final_time = 0.25;
    o.n_paths = 2;
    const Vector dts{1.0 / 16, 1.0 / 32, 1.0 / 64};
    const StrongOrderResult r = strong_order(p, config(0.5, 0.1, 1), u0, dts, o);
    CHECK(r.slope == doctest::Approx(2.0).epsilon(0.1));
  }
  SUBCASE("Euler-Maruyama on geometric Brownian motion is order one half") {
    const GridSpec g = build_grid(0.0, 1.0, 4);
    const SemiDiscreteProblem p =
        fixture::dissipative_problem(g, noise::MultiplicativeLinear{}, 0.5, 0.5);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    StrongOrderOptions o;
    o.final_time = 1.0;
    o.n_paths = 400;
    o.seed = 3;
    const Vector dts{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
    const StrongOrderResult r = strong_order(p, config(0.0, 0.1, 1), u0, dts, o);
    CHECK(r.slope == doctest::Approx(0.5).epsilon(0.3));
  }
}

TEST_CASE("strong order rejects bad input") {
  const GridSpec g = build_grid(0.0, 1.0, 8);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::Additive{0.1});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  StrongOrderOptions o;
  o.n_paths = 2;
  const SchemeConfig c = config(1.0, 0.1, 1);
  CHECK(code_of([&] { strong_order(p, c, u0, Vector{0.1}, o); }) == ErrorCode::kDegenerateRegression);
  CHECK(code_of([&] { strong_order(p, c, u0, Vector{0.1, 0.03}, o); }) == ErrorCode::kInvalidArgument);
  CHECK(code_of([&] { strong_order(p, c, Vector(3), Vector{0.1, 0.05}, o); }) ==
        ErrorCode::kDimensionMismatch);
  // Identical initial data is fine, but u0 = 0 with no noise gives zero error.
  const SemiDiscreteProblem quiet = make_ginzburg_landau(g, noise::Additive{0.0});
  CHECK(code_of([&] { strong_order(quiet, c, Vector(7, 0.0), Vector{0.1, 0.05}, o); }) ==
        ErrorCode::kDegenerateRegression);
}

TEST_CASE("property: a gamma-certified configuration contracts in mean square") {
  const GridSpec g = build_grid(0.0, 1.0, 8);
  const double dt = 0.01;
  for (bool additive : {true, false}) {
    const NoiseKind n = additive ? NoiseKind{noise::Additive{0.3}} : NoiseKind{noise::MultiplicativeLinear{}};
    const SemiDiscreteProblem p = fixture::dissipative_problem(g, n, 1.0, 5.0);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    const SchemeConfig c = config(1.0, dt, 100);
    const DerivedConstants d = derive_constants(p, c, u0, 4, MVariant::kExpectationOfNorm, 1);
    const ContractivityReport r =
        evaluate_predicates(d.constants, Scheme::kThetaMaruyama,
                            additive ? NoiseClass::kAdditive : NoiseClass::kMultiplicative, 1.0,
                            dt, g.dx, 2, c.n_steps, Framework::kOneSidedLipschitz);
    REQUIRE(r.verdict == Verdict::kContractive);
    REQUIRE(r.valid);
    const MsdEstimate est = run_msd(p, c, u0, y0, 200);
    if (additive) {
      for (std::size_t k = 1; k < est.size(); ++k) CHECK(est.msd[k] <= r.alpha * est.msd[k - 1] * (1 + 1e-12));
    } else {
      CHECK(est.msd.back() <= 1.2 * r.alpha_n * est.msd.front());
    }
  }
}
