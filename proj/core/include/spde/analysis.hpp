#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "spde/band_matrix.hpp"
#include "spde/integrators.hpp"
#include "spde/problems.hpp"

namespace spde {

/// Which expectation defines M: E|R'(U)| pairs with the multiplicative and
/// IMEX bounds, E|R'(U)|^2 with the additive theta-method bound.
enum class MVariant { kExpectationOfNorm, kExpectationOfNormSquared };

enum class NoiseClass { kAdditive, kMultiplicative };
enum class Verdict { kContractive, kNotContractive, kIndeterminate };

/// Coefficient family used by evaluate_predicates.
/// kLemma: the alpha coefficients built on the (I + theta dt A)^{-1} estimates.
/// kOneSidedLipschitz: gamma, valid for the theta-Maruyama scheme only.
enum class Framework { kLemma, kOneSidedLipschitz };

const char* to_string(MVariant v) noexcept;
const char* to_string(NoiseClass n) noexcept;
const char* to_string(Verdict v) noexcept;

struct AnalysisConstants {
  double norm_A = 0.0;
  double M = 0.0;
  MVariant m_variant = MVariant::kExpectationOfNorm;
  double L_g = 0.0;  // local Lipschitz constant of G
  double mu = 0.0;   // one-sided Lipschitz constant of R
  double mu_star = 0.0;
  double L = 0.0;  // |G(U) - G(V)|^2 <= L |U - V|^2

  /// Fills mu_star = norm_A + mu.
  static AnalysisConstants make(double norm_A, double M, MVariant variant, double L_g,
                                double mu, double L);
};

void validate(const AnalysisConstants& c);

/// Applies D(theta, dt) = (I + theta dt A)^{-1} through a banded factorization.
class ResolventSolver {
 public:
  ResolventSolver(const BandMatrix& a, double theta, double dt);

  Vector apply(std::span<const double> v) const { return lu_.solve(v); }
  double theta() const noexcept { return theta_; }
  double dt() const noexcept { return dt_; }

 private:
  double theta_;
  double dt_;
  BandedLU lu_;
};

ResolventSolver matrix_D(const BandMatrix& a, double theta, double dt);

struct LemmaBounds {
  double bound_D = 1.0;  // 1 / (1 - theta dt |A|)
  double bound_C = 1.0;  // (1 + (1-theta) dt |A|) / (1 - theta dt |A|)
  bool valid = true;     // theta dt |A| < 1
};

LemmaBounds lemma_bounds(double norm_A, double theta, double dt);

/// ((1 + (1-th) dt (|A|+M)) / (1 - th dt (|A|+M)))^2
double alpha_theta_additive(const AnalysisConstants& c, double theta, double dt);
/// ((1 + (1-th) dt (|A|+M))^2 + L_g^2 dt) / (1 - th dt (|A|+M))^2
double alpha_theta_multiplicative(const AnalysisConstants& c, double theta, double dt);
/// ((1 + (1-th) dt |A| + dt M) / (1 - th dt |A|))^2
double alpha_imex_additive(const AnalysisConstants& c, double theta, double dt);
/// ((1 + (1-th) dt |A| + dt M)^2 + L_g^2 dt) / (1 - th dt |A|)^2
double alpha_imex_multiplicative(const AnalysisConstants& c, double theta, double dt);
/// (1 + (1-th)^2 dt^2 (|A|^2 + M + 2|A| mu) + L dt + (1-th) dt mu*) / (1 - 2 th dt mu*)
double gamma_monotonicity(const AnalysisConstants& c, double theta, double dt);

/// alpha* = 2 mu* + L < 0.
bool problem_dissipativity(const AnalysisConstants& c);

enum class BoundKind { kUpper, kLower };

struct ContractivityReport {
  Scheme scheme = Scheme::kThetaMaruyama;
  NoiseClass noise = NoiseClass::kAdditive;
  Framework framework = Framework::kLemma;
  double theta = 1.0;
  double dt = 0.0;
  double dx = 0.0;
  int order_p = 2;
  std::size_t n_steps = 1;

  AnalysisConstants constants;
  /// One-step coefficient of the selected framework (alpha or gamma).
  double alpha = 1.0;
  /// alpha^n_steps, the n-step bound implied by the one-step factor.
  double alpha_n = 1.0;
  /// Every denominator of the coefficient is positive.
  bool valid = true;

  /// Named inequalities: eqpar, eqpar2multheta, eqpar3, eqpar2bis, eqpar2,
  /// condcontr, dissipative.
  std::map<std::string, bool> predicates;
  std::string deciding_condition;

  std::optional<double> dt_bound;
  std::optional<BoundKind> dt_bound_kind;
  std::optional<double> dx_bound;

  Verdict verdict = Verdict::kIndeterminate;
  std::string note;
};

ContractivityReport evaluate_predicates(const AnalysisConstants& c, Scheme scheme,
                                        NoiseClass noise, double theta, double dt, double dx,
                                        int order_p, std::size_t n_steps = 1,
                                        Framework framework = Framework::kLemma);

/// Flat JSON object; predicate names become top-level boolean fields.
nlohmann::json to_json(const ContractivityReport& r);
std::string human_readable(const ContractivityReport& r);

struct MEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  std::size_t argmax_step = 0;
  std::size_t n_paths = 0;
  double blowup_fraction = 0.0;
  bool reliable = true;
  /// Largest |U_n|_inf seen on any path; the radius behind a local Lipschitz estimate.
  double max_abs_state = 0.0;
  /// Largest sampled eigenvalue of the symmetric part of R'(U_n), when requested.
  std::optional<double> max_sym_eigenvalue;
};

/// Simulates n_paths trajectories from u0 with cfg (seeded from `seed`),
/// averages |R'(U_n)| (or its square) over paths per step and returns the
/// maximum over steps. Paths stop contributing at their blow-up step.
MEstimate estimate_M(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                     std::span<const double> u0, std::size_t n_paths, MVariant variant,
                     std::uint64_t seed, bool sample_one_sided = false,
                     std::size_t workers = 0);

struct DerivedConstants {
  AnalysisConstants constants;
  MEstimate m_estimate;
  std::string mu_source;  // "analytic" or "sampled"
  std::string lipschitz_source;
};

/// |A| by spectral norm, M by estimate_M, L_g / L by noise kind, mu
/// analytically for the Ginzburg-Landau type reactions and sampled otherwise.
DerivedConstants derive_constants(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                                  std::span<const double> u0, std::size_t n_paths,
                                  MVariant variant, std::uint64_t seed, std::size_t workers = 0);

}  // namespace spde
