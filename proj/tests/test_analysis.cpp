#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "formula_oracle.hpp"
#include "oracles.hpp"
#include "spde/analysis.hpp"
#include "spde/error.hpp"
#include "spde/experiments.hpp"

using namespace spde;

namespace {

AnalysisConstants constants(double normA, double M, double Lg = 0.0, double mu = 1.0) {
  return AnalysisConstants::make(normA, M, MVariant::kExpectationOfNorm, Lg, mu, Lg * Lg);
}

ContractivityReport eval(const AnalysisConstants& c, Scheme s, NoiseClass n, double theta,
                         double dt, Framework f = Framework::kLemma) {
  return evaluate_predicates(c, s, n, theta, dt, 0.1, 2, 1, f);
}

}  // namespace

TEST_CASE("coefficients equal one at dt = 0") {
  const AnalysisConstants c = constants(300.0, 4.0, 2.0, -1.5);
  for (double theta : {0.0, 0.3, 0.5, 1.0}) {
    CHECK(alpha_theta_additive(c, theta, 0.0) == 1.0);
    CHECK(alpha_theta_multiplicative(c, theta, 0.0) == 1.0);
    CHECK(alpha_imex_additive(c, theta, 0.0) == 1.0);
    CHECK(alpha_imex_multiplicative(c, theta, 0.0) == 1.0);
    CHECK(gamma_monotonicity(c, theta, 0.0) == 1.0);
  }
}

TEST_CASE("hand-computed coefficient values") {
  // |A| + M = 10, theta = 1, dt = 0.05: ((1) / (1 - 0.5))^2 = 4
  const AnalysisConstants c = constants(6.0, 4.0, 2.0, 0.5);
  CHECK(alpha_theta_additive(c, 1.0, 0.05) == doctest::Approx(4.0));
  // (1 + 4 * 0.05) / 0.25 = 4.8
  CHECK(alpha_theta_multiplicative(c, 1.0, 0.05) == doctest::Approx(4.8));
  // ((1 + 0.2) / (1 - 0.3))^2
  CHECK(alpha_imex_additive(c, 1.0, 0.05) == doctest::Approx(std::pow(1.2 / 0.7, 2)));
}

TEST_CASE("coefficients agree with an independent straight-line evaluation") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const formula::Params p{u01(rng), 0.1 * u01(rng), 500 * u01(rng), 20 * u01(rng),
                            3 * u01(rng), -10 + 20 * u01(rng), 9 * u01(rng)};
    const AnalysisConstants c =
        AnalysisConstants::make(p.normA, p.M, MVariant::kExpectationOfNorm, p.Lg, p.mu, p.L);
    CHECK(alpha_theta_additive(c, p.theta, p.dt) == doctest::Approx(formula::coeff1(p)).epsilon(1e-12));
    CHECK(alpha_theta_multiplicative(c, p.theta, p.dt) == doctest::Approx(formula::coeff2(p)).epsilon(1e-12));
    CHECK(alpha_imex_additive(c, p.theta, p.dt) == doctest::Approx(formula::coeff3(p)).epsilon(1e-12));
    CHECK(alpha_imex_multiplicative(c, p.theta, p.dt) == doctest::Approx(formula::coeff4(p)).epsilon(1e-12));
    CHECK(gamma_monotonicity(c, p.theta, p.dt) == doctest::Approx(formula::gamma(p)).epsilon(1e-12));
  }
}

TEST_CASE("vanishing denominators are reported") {
  const AnalysisConstants c = constants(9.0, 1.0);
  CHECK_THROWS_AS(alpha_theta_additive(c, 1.0, 0.1), Error);
  CHECK_THROWS_AS(alpha_imex_additive(constants(10.0, 0.0), 1.0, 0.1), Error);
  const ContractivityReport r = eval(c, Scheme::kThetaMaruyama, NoiseClass::kAdditive, 1.0, 0.1);
  CHECK(r.verdict == Verdict::kIndeterminate);
  CHECK_FALSE(r.valid);
}

TEST_CASE("constants validation") {
  CHECK_THROWS_AS(validate(constants(-1.0, 0.0)), Error);
  AnalysisConstants c = constants(1.0, 1.0);
  c.mu_star = 7.0;
  CHECK_THROWS_AS(validate(c), Error);
  CHECK(constants(3.0, 0.0, 0.0, -1.0).mu_star == 2.0);
}

TEST_CASE("the named verdict examples") {
  const AnalysisConstants c = constants(1014.0, 4.0);
  SUBCASE("theta = 1 with (1-2 theta) dt (|A|+M) < -2 is contractive") {
    const auto r = eval(c, Scheme::kThetaMaruyama, NoiseClass::kAdditive, 1.0, 0.002);
    CHECK(r.predicates.at("eqpar"));
    CHECK(r.verdict == Verdict::kContractive);
    CHECK(r.deciding_condition == "eqpar");
  }
  SUBCASE("theta = 0.25 is not contractive") {
    for (double dt : {1e-5, 1e-3, 0.1}) {
      for (auto n : {NoiseClass::kAdditive, NoiseClass::kMultiplicative}) {
        CHECK(eval(c, Scheme::kThetaMaruyama, n, 0.25, dt).verdict == Verdict::kNotContractive);
      }
    }
  }
  SUBCASE("theta = 1/2 on the theta-method path is indeterminate") {
    const auto r = eval(c, Scheme::kThetaMaruyama, NoiseClass::kAdditive, 0.5, 0.002);
    CHECK(r.verdict == Verdict::kIndeterminate);
    CHECK(r.note.find("theta = 1/2") != std::string::npos);
  }
}

TEST_CASE("property: verdict follows alpha < 1 and valid follows the denominators") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    const double theta = u01(rng);
    const double dt = std::pow(10.0, -5 + 4 * u01(rng));
    const AnalysisConstants c = constants(2000 * u01(rng), 10 * u01(rng), 2 * u01(rng));
    for (auto s : {Scheme::kThetaMaruyama, Scheme::kThetaImex}) {
      for (auto n : {NoiseClass::kAdditive, NoiseClass::kMultiplicative}) {
        const auto r = eval(c, s, n, theta, dt);
        const double den = s == Scheme::kThetaMaruyama ? 1 - theta * dt * (c.norm_A + c.M)
                                                       : 1 - theta * dt * c.norm_A;
        CHECK(r.valid == (den > 0));
        if (r.verdict != Verdict::kIndeterminate) {
          CHECK((r.verdict == Verdict::kContractive) == (r.alpha < 1.0));
          CHECK(r.predicates.at(r.deciding_condition) == (r.alpha < 1.0));
        }
        CHECK(r.alpha_n == doctest::Approx(r.alpha).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("property: a valid lemma coefficient is never below one") {
  // Numerator >= 1 >= positive denominator for every admissible input.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    const AnalysisConstants c = constants(1e3 * u01(rng), 10 * u01(rng), u01(rng));
    const double theta = u01(rng), dt = 0.01 * u01(rng);
    for (auto s : {Scheme::kThetaMaruyama, Scheme::kThetaImex}) {
      const auto r = eval(c, s, NoiseClass::kAdditive, theta, dt);
      if (r.valid) CHECK(r.alpha >= 1.0);
    }
  }
}

TEST_CASE("property: eqpar3 and eqpar2bis agree") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 3000; ++i) {
    const AnalysisConstants c = constants(1e3 * u01(rng), 50 * u01(rng));
    const double theta = u01(rng), dt = 0.05 * u01(rng) + 1e-9;
    const auto r = eval(c, Scheme::kThetaImex, NoiseClass::kAdditive, theta, dt);
    CHECK(r.predicates.at("eqpar3") == r.predicates.at("eqpar2bis"));
  }
}

TEST_CASE("dt bounds sit where alpha crosses one") {
  const AnalysisConstants c = constants(400.0, 3.0, 1.0);
  for (auto n : {NoiseClass::kAdditive, NoiseClass::kMultiplicative}) {
    const auto r = eval(c, Scheme::kThetaMaruyama, n, 0.8, 0.01);
    REQUIRE(r.dt_bound.has_value());
    CHECK(*r.dt_bound_kind == BoundKind::kLower);
    const double b = *r.dt_bound;
    CHECK(eval(c, Scheme::kThetaMaruyama, n, 0.8, b * 1.001).alpha < 1.0);
    CHECK(eval(c, Scheme::kThetaMaruyama, n, 0.8, b * 0.999).alpha > 1.0);
  }
  const auto low = eval(c, Scheme::kThetaMaruyama, NoiseClass::kAdditive, 0.2, 0.01);
  CHECK(*low.dt_bound_kind == BoundKind::kUpper);
  CHECK(*low.dt_bound < 0.0);  // infeasible
}

TEST_CASE("IMEX dx bound and empty multiplicative interval") {
  const AnalysisConstants c = constants(400.0, 3.0, 1.0);
  const auto r = evaluate_predicates(c, Scheme::kThetaImex, NoiseClass::kAdditive, 0.75, 0.01,
                                     0.05, 2, 1);
  REQUIRE(r.dx_bound.has_value());
  const double norm_B = 400.0 * 0.05 * 0.05;
  CHECK(*r.dx_bound == doctest::Approx(std::sqrt(0.5 * norm_B / 3.0)));
  const auto m = evaluate_predicates(c, Scheme::kThetaImex, NoiseClass::kMultiplicative, 0.75,
                                     0.01, 0.05, 2, 1);
  CHECK_FALSE(m.dx_bound.has_value());
  CHECK_FALSE(m.note.empty());
}

TEST_CASE("one-sided Lipschitz framework") {
  SUBCASE("theta = 1 reduces to the dissipativity sign") {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
      const double mu_star = -20 + 40 * u01(rng);
      const double L = 10 * u01(rng);
      const double dt = 0.1 * u01(rng) + 1e-6;
      if (1 - 2 * dt * mu_star <= 0) continue;
      const AnalysisConstants c = AnalysisConstants::make(0.0, 0.0, MVariant::kExpectationOfNorm,
                                                          std::sqrt(L), mu_star, L);
      const double g = gamma_monotonicity(c, 1.0, dt);
      const double s = L + 2 * mu_star;
      if (std::abs(s) > 1e-9) CHECK((g < 1.0) == (s < 0.0));
    }
  }
  SUBCASE("condcontr is gamma < 1 in the valid regime") {
    const AnalysisConstants c = AnalysisConstants::make(1.0, 0.5, MVariant::kExpectationOfNorm,
                                                        0.0, -6.0, 0.0);
    for (double theta : {0.5, 0.8, 1.0}) {
      for (double dt : {1e-3, 1e-2, 0.1}) {
        const auto r = eval(c, Scheme::kThetaMaruyama, NoiseClass::kAdditive, theta, dt,
                            Framework::kOneSidedLipschitz);
        CHECK(r.valid);
        CHECK(r.predicates.at("condcontr") == (r.alpha < 1.0));
        CHECK(r.predicates.at("dissipative"));
      }
    }
  }
  SUBCASE("IMEX is outside its scope") {
    CHECK_THROWS_AS(eval(constants(1, 1), Scheme::kThetaImex, NoiseClass::kAdditive, 1.0, 0.1,
                         Framework::kOneSidedLipschitz),
                    Error);
  }
}

TEST_CASE("resolvent and lemma bounds") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const BandMatrix a = assemble_neg_laplacian(g);
  const ResolventSolver d = matrix_D(a, 1.0, 0.01);
  const Vector v = oracle::random_vector(15, 3);
  const Vector dv = d.apply(v);
  const Vector back = (BandMatrix::identity(15) + 0.01 * a).multiply(dv);
  for (std::size_t i = 0; i < 15; ++i) CHECK(back[i] == doctest::Approx(v[i]));
  // A is positive definite, so |D v| <= |v|.
  CHECK(oracle::norm(dv) <= oracle::norm(v));

  const LemmaBounds b = lemma_bounds(100.0, 0.5, 0.01);
  CHECK(b.valid);
  CHECK(b.bound_D == doctest::Approx(2.0));
  CHECK(b.bound_C == doctest::Approx(3.0));
  CHECK_FALSE(lemma_bounds(100.0, 1.0, 0.02).valid);
}

TEST_CASE("flat JSON report") {
  const auto r = eval(constants(1014.0, 4.0), Scheme::kThetaMaruyama, NoiseClass::kAdditive, 1.0, 0.002);
  const nlohmann::json j = to_json(r);
  CHECK(j.at("verdict") == "contractive");
  CHECK(j.at("eqpar").is_boolean());
  CHECK(j.at("dissipative").is_boolean());
  CHECK(j.at("alpha").get<double>() == doctest::Approx(r.alpha));
  for (const auto& [k, v] : j.items()) CHECK_FALSE(v.is_object());
  CHECK(human_readable(r).find("verdict: contractive") != std::string::npos);
}

TEST_CASE("estimate_M on deterministic Ginzburg-Landau") {
  // With no noise the largest |1 - 3u^2| is attained at step 0, at the node x = 1/2.
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = make_ginzburg_landau(g, noise::Additive{0.0});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  SchemeConfig c;
  c.n_steps = 20;
  const MEstimate m = estimate_M(p, c, u0, 4, MVariant::kExpectationOfNormSquared, 1);
  CHECK(m.value == doctest::Approx(4.0));
  CHECK(m.argmax_step == 0);
  CHECK(m.standard_error == doctest::Approx(0.0).epsilon(1e-12));
  const MEstimate m1 = estimate_M(p, c, u0, 4, MVariant::kExpectationOfNorm, 1);
  CHECK(m1.value == doctest::Approx(2.0));
  CHECK(m.max_abs_state == doctest::Approx(1.0));
}

TEST_CASE("estimate_M is independent of the worker count") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  const SemiDiscreteProblem p = make_cahn_hilliard(g, noise::MultiplicativeLinear{});
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  SchemeConfig c;
  c.n_steps = 10;
  const MEstimate a = estimate_M(p, c, u0, 6, MVariant::kExpectationOfNorm, 3, true, 1);
  const MEstimate b = estimate_M(p, c, u0, 6, MVariant::kExpectationOfNorm, 3, true, 4);
  CHECK(a.value == b.value);
  CHECK(a.standard_error == b.standard_error);
  CHECK(*a.max_sym_eigenvalue == *b.max_sym_eigenvalue);
}

TEST_CASE("derive_constants by noise kind") {
  const GridSpec g = build_grid(0.0, 1.0, 16);
  SchemeConfig c;
  c.n_steps = 10;
  auto derive = [&](NoiseKind n) {
    const SemiDiscreteProblem p = make_ginzburg_landau(g, n);
    const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
    return derive_constants(p, c, u0, 4, MVariant::kExpectationOfNorm, 1);
  };
  const DerivedConstants add = derive(noise::Additive{0.1});
  CHECK(add.constants.L_g == 0.0);
  CHECK(add.constants.mu == 1.0);
  CHECK(add.mu_source == "analytic");
  CHECK(add.constants.norm_A ==
        doctest::Approx(neg_laplacian_max_eigenvalue(g.unknowns(), g.dx)).epsilon(1e-8));
  const DerivedConstants lin = derive(noise::MultiplicativeLinear{});
  CHECK(lin.constants.L_g == 1.0);
  CHECK(lin.constants.L == 1.0);
  const DerivedConstants quad = derive(noise::MultiplicativeQuadratic{});
  CHECK(quad.constants.L_g == doctest::Approx(2.0 * quad.m_estimate.max_abs_state));

  CustomProblemSpec s;
  s.grid = g;
  s.op = assemble_neg_laplacian(g);
  s.reaction = [](std::span<const double> u) { return Vector(u.begin(), u.end()); };
  s.reaction_jacobian = [](std::span<const double> u) { return BandMatrix::identity(u.size()); };
  s.noise = noise::Custom{"sin"};
  s.diffusion = [](std::span<const double> u) { return Vector(u.begin(), u.end()); };
  const SemiDiscreteProblem custom = make_custom(s);
  const auto [u0, y0] = sample_initial(custom, InitialCondition::sine());
  try {
    derive_constants(custom, c, u0, 2, MVariant::kExpectationOfNorm, 1);
    FAIL("expected unsupported-combination");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kUnsupportedCombination);
  }
}

TEST_CASE("mu is sampled for coupled reactions") {
  const GridSpec g = build_grid(0.0, 1.0, 8);
  const SemiDiscreteProblem p = fixture::dissipative_problem(g, noise::Additive{0.1}, 1.0, 3.0);
  const auto [u0, y0] = sample_initial(p, InitialCondition::sine());
  SchemeConfig c;
  c.n_steps = 5;
  const DerivedConstants d = derive_constants(p, c, u0, 2, MVariant::kExpectationOfNorm, 1);
  CHECK(d.mu_source == "sampled");
  CHECK(d.constants.mu == doctest::Approx(-3.0));
  CHECK(d.constants.mu_star == doctest::Approx(-2.0));
}
