#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "spde/band_matrix.hpp"
#include "spde/problems.hpp"

namespace spde {

enum class Scheme { kThetaMaruyama, kThetaImex };

/// Weight of the explicit reaction term in the theta-IMEX update. kDt is the
/// weight used by the contractivity bounds; kThetaDt weights the reaction
/// by theta*dt instead.
enum class ImexReactionWeight { kDt, kThetaDt };

/// kInvSqrtDx turns nodal Brownian motions into a space-time white noise
/// approximation by scaling increments with 1/sqrt(dx).
enum class NoiseScaling { kNone, kInvSqrtDx };

/// Reporting only: kSqrtDx reports dx * |Z|^2 (grid L2 norm) instead of |Z|^2.
enum class NormScaling { kNone, kSqrtDx };

struct SchemeConfig {
  double theta = 1.0;
  double dt = 1.0 / 500.0;
  std::size_t n_steps = 500;
  Scheme scheme = Scheme::kThetaMaruyama;
  double newton_tol = 1e-10;
  std::size_t newton_max_iter = 50;
  std::uint64_t seed = 1;
  ImexReactionWeight imex_reaction_weight = ImexReactionWeight::kDt;
  NoiseScaling noise_scaling = NoiseScaling::kNone;
  NormScaling norm_scaling = NormScaling::kNone;

  double final_time() const noexcept { return dt * static_cast<double>(n_steps); }
};

void validate(const SchemeConfig& cfg);
const char* to_string(Scheme s) noexcept;

/// Independent stream for (seed, path). Used for every path-level draw so
/// results never depend on how paths are scheduled.
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

/// dim independent N(0, dt) draws.
Vector sample_wiener_increments(std::mt19937_64& rng, std::size_t dim, double dt);

enum class StepStatus { kOk, kNewtonDiverged, kNonFinite };

struct StepResult {
  Vector x;
  std::size_t iters = 0;
  StepStatus status = StepStatus::kOk;
  double residual = 0.0;

  bool ok() const noexcept { return status == StepStatus::kOk; }
};

/// X+ = X + (1-theta) dt f(X) + theta dt f(X+) + G(X) dW, f(X) = -A X + R(X).
/// Solved by Newton with Jacobian I + theta dt (A - R'(X+)) starting from X;
/// theta = 0 is the explicit Euler-Maruyama update with zero iterations.
StepResult theta_maruyama_step(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                               std::span<const double> x_n, std::span<const double> dw);

/// X+ = (I + theta dt A)^{-1} (X - (1-theta) dt A X + w R(X) + G(X) dW), with w = dt
/// or theta*dt per cfg.imex_reaction_weight. Throws kSingularMatrix.
Vector theta_imex_step(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                       std::span<const double> x_n, std::span<const double> dw);

/// Stateless one-step map for a fixed (problem, cfg), caching the
/// factorization of I + theta dt A used by the IMEX scheme.
class Stepper {
 public:
  Stepper(const SemiDiscreteProblem& problem, const SchemeConfig& cfg);

  StepResult step(std::span<const double> x_n, std::span<const double> dw) const;
  /// Scale applied to N(0, dt) increments before they enter the scheme.
  double noise_scale() const noexcept { return noise_scale_; }

  const SemiDiscreteProblem& problem() const noexcept { return *problem_; }
  const SchemeConfig& config() const noexcept { return cfg_; }

 private:
  StepResult imex_step(std::span<const double> x_n, std::span<const double> dw) const;

  const SemiDiscreteProblem* problem_;
  SchemeConfig cfg_;
  std::optional<BandedLU> implicit_linear_;
  double noise_scale_ = 1.0;
};

struct PairTrajectory {
  Vector times;
  std::vector<Vector> u_states;  // filled only when recording
  std::vector<Vector> y_states;
  Vector z_sqnorms;
  /// Per step, the larger Newton count of the two solutions; entry 0 is 0.
  std::vector<std::size_t> newton_iters;
  /// Step index at which a non-finite value or Newton failure occurred.
  std::optional<std::size_t> blowup_step;
};

/// Squared norm of u - y, scaled by dx under NormScaling::kSqrtDx.
double deviation_sqnorm(std::span<const double> u, std::span<const double> y,
                        NormScaling scaling, double dx);

/// Advances U and Y for cfg.n_steps with one shared increment per step,
/// drawn from path_rng(cfg.seed, path_id).
PairTrajectory simulate_pair(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                             std::span<const double> u0, std::span<const double> y0,
                             bool record_states, std::uint64_t path_id = 0);

}  // namespace spde
