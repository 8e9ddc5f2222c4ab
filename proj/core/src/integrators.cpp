#include "spde/integrators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "spde/error.hpp"

namespace spde {

namespace {

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

void check_lengths(const SemiDiscreteProblem& p, std::span<const double> x,
                   std::span<const double> dw) {
  if (x.size() != p.state_dim() || dw.size() != p.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "step: state/increment length must equal state_dim " +
                    std::to_string(p.state_dim()));
  }
}

// X + (1-theta) dt f(X) + G(X) dW
Vector explicit_part(const SemiDiscreteProblem& p, const SchemeConfig& cfg,
                     std::span<const double> x, std::span<const double> dw) {
  Vector rhs(x.begin(), x.end());
  if (cfg.theta < 1.0) {
    const Vector f = p.drift(x);
    const double w = (1.0 - cfg.theta) * cfg.dt;
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += w * f[i];
  }
  const Vector g = p.diffusion(x);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += g[i] * dw[i];
  return rhs;
}

}  // namespace

void validate(const SchemeConfig& cfg) {
  if (!(cfg.theta >= 0.0 && cfg.theta <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scheme: theta must lie in [0, 1]");
  }
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw Error(ErrorCode::kInvalidArgument, "scheme: dt must be positive");
  }
  if (!(cfg.newton_tol > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "scheme: newton_tol must be positive");
  }
  if (cfg.newton_max_iter == 0) {
    throw Error(ErrorCode::kInvalidArgument, "scheme: newton_max_iter must be positive");
  }
}

const char* to_string(Scheme s) noexcept {
  return s == Scheme::kThetaMaruyama ? "theta_maruyama" : "theta_imex";
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32),
                    0x5eedu};
  return std::mt19937_64(seq);
}

Vector sample_wiener_increments(std::mt19937_64& rng, std::size_t dim, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::kInvalidArgument, "wiener increments: dt must be > 0");
  std::normal_distribution<double> normal(0.0, std::sqrt(dt));
  Vector dw(dim);
  for (auto& x : dw) x = normal(rng);
  return dw;
}

StepResult theta_maruyama_step(const SemiDiscreteProblem& p, const SchemeConfig& cfg,
                               std::span<const double> x_n, std::span<const double> dw) {
  check_lengths(p, x_n, dw);
  StepResult out;
  Vector rhs = explicit_part(p, cfg, x_n, dw);
  if (!all_finite(rhs)) {
    out.x = std::move(rhs);
    out.status = StepStatus::kNonFinite;
    return out;
  }
  if (cfg.theta == 0.0) {
    out.x = std::move(rhs);
    return out;
  }

  const double h = cfg.theta * cfg.dt;
  const double target = cfg.newton_tol * (1.0 + norm2(rhs));
  const std::size_t n = p.state_dim();
  const BandMatrix identity = BandMatrix::identity(n);
  Vector x(x_n.begin(), x_n.end());
  for (std::size_t it = 0;; ++it) {
    // F(x) = x - h (-A x + R(x)) - rhs
    const Vector f = p.drift(x);
    Vector residual(n);
    for (std::size_t i = 0; i < n; ++i) residual[i] = x[i] - h * f[i] - rhs[i];
    out.residual = norm2(residual);
    if (!std::isfinite(out.residual)) {
      out.status = StepStatus::kNonFinite;
      break;
    }
    if (out.residual <= target) break;
    if (it == cfg.newton_max_iter) {
      out.status = StepStatus::kNewtonDiverged;
      break;
    }
    BandMatrix jac = identity + h * (p.op - p.reaction_jacobian(x));
    try {
      BandedLU lu(jac);
      lu.solve_in_place(residual);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kSingularMatrix) throw;
      out.status = StepStatus::kNewtonDiverged;
      break;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] -= residual[i];
    out.iters = it + 1;
  }
  out.x = std::move(x);
  return out;
}

Vector theta_imex_step(const SemiDiscreteProblem& p, const SchemeConfig& cfg,
                       std::span<const double> x_n, std::span<const double> dw) {
  SchemeConfig c = cfg;
  c.scheme = Scheme::kThetaImex;
  c.noise_scaling = NoiseScaling::kNone;
  return Stepper(p, c).step(x_n, dw).x;
}

Stepper::Stepper(const SemiDiscreteProblem& problem, const SchemeConfig& cfg)
    : problem_(&problem), cfg_(cfg) {
  validate(cfg_);
  if (cfg_.scheme == Scheme::kThetaImex) {
    implicit_linear_.emplace(BandMatrix::identity(problem.state_dim()) +
                             (cfg_.theta * cfg_.dt) * problem.op);
  }
  if (cfg_.noise_scaling == NoiseScaling::kInvSqrtDx) {
    noise_scale_ = 1.0 / std::sqrt(problem.grid.dx);
  }
}

StepResult Stepper::step(std::span<const double> x_n, std::span<const double> dw) const {
  if (cfg_.scheme == Scheme::kThetaMaruyama) return theta_maruyama_step(*problem_, cfg_, x_n, dw);
  return imex_step(x_n, dw);
}

StepResult Stepper::imex_step(std::span<const double> x_n, std::span<const double> dw) const {
  const SemiDiscreteProblem& p = *problem_;
  check_lengths(p, x_n, dw);
  const std::size_t n = p.state_dim();
  const double w = cfg_.imex_reaction_weight == ImexReactionWeight::kDt
                       ? cfg_.dt
                       : cfg_.theta * cfg_.dt;
  const Vector ax = p.op.multiply(x_n);
  const Vector r = p.reaction(x_n);
  const Vector g = p.diffusion(x_n);
  Vector b(n);
  const double lin = (1.0 - cfg_.theta) * cfg_.dt;
  for (std::size_t i = 0; i < n; ++i) b[i] = x_n[i] - lin * ax[i] + w * r[i] + g[i] * dw[i];
  StepResult out;
  if (!all_finite(b)) {
    out.x = std::move(b);
    out.status = StepStatus::kNonFinite;
    return out;
  }
  implicit_linear_->solve_in_place(b);
  if (!all_finite(b)) out.status = StepStatus::kNonFinite;
  out.x = std::move(b);
  return out;
}

double deviation_sqnorm(std::span<const double> u, std::span<const double> y,
                        NormScaling scaling, double dx) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double z = u[i] - y[i];
    s += z * z;
  }
  return scaling == NormScaling::kSqrtDx ? s * dx : s;
}

PairTrajectory simulate_pair(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                             std::span<const double> u0, std::span<const double> y0,
                             bool record_states, std::uint64_t path_id) {
  const std::size_t n = problem.state_dim();
  if (u0.size() != n || y0.size() != n) {
    throw Error(ErrorCode::kDimensionMismatch, "simulate_pair: initial state length mismatch");
  }
  if (!all_finite(u0) || !all_finite(y0)) {
    throw Error(ErrorCode::kInvalidArgument, "simulate_pair: non-finite initial state");
  }
  const Stepper stepper(problem, cfg);
  auto rng = path_rng(cfg.seed, path_id);
  const double dx = problem.grid.dx;

  PairTrajectory tr;
  tr.times.reserve(cfg.n_steps + 1);
  tr.z_sqnorms.reserve(cfg.n_steps + 1);
  tr.newton_iters.reserve(cfg.n_steps + 1);
  Vector u(u0.begin(), u0.end());
  Vector y(y0.begin(), y0.end());
  tr.times.push_back(0.0);
  tr.z_sqnorms.push_back(deviation_sqnorm(u, y, cfg.norm_scaling, dx));
  tr.newton_iters.push_back(0);
  if (record_states) {
    tr.u_states.push_back(u);
    tr.y_states.push_back(y);
  }

  for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
    Vector dw = sample_wiener_increments(rng, n, cfg.dt);
    if (stepper.noise_scale() != 1.0) {
      for (auto& v : dw) v *= stepper.noise_scale();
    }
    StepResult su = stepper.step(u, dw);
    StepResult sy = stepper.step(y, dw);
    const double z = su.ok() && sy.ok() ? deviation_sqnorm(su.x, sy.x, cfg.norm_scaling, dx)
                                        : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(z)) {
      tr.blowup_step = step;
      break;
    }
    u = std::move(su.x);
    y = std::move(sy.x);
    tr.times.push_back(static_cast<double>(step) * cfg.dt);
    tr.z_sqnorms.push_back(z);
    tr.newton_iters.push_back(std::max(su.iters, sy.iters));
    if (record_states) {
      tr.u_states.push_back(u);
      tr.y_states.push_back(y);
    }
  }
  return tr;
}

}  // namespace spde
