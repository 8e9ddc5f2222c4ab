#include "spde/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "spde/error.hpp"
#include "spde/grid.hpp"
#include "spde/parallel.hpp"

namespace spde {

namespace {

double checked_ratio(double num, double den, const char* what) {
  if (den == 0.0) {
    throw Error(ErrorCode::kDivisionByZero, std::string(what) + ": denominator vanishes");
  }
  return num / den;
}

double jacobian_norm(const BandMatrix& j) {
  if (j.half_bandwidth() == 0) return j.max_abs();
  if (j.is_symmetric()) return spectral_norm(j, 1e-8);
  return operator_norm(j, 1e-8);
}

double max_sym_eigenvalue(const BandMatrix& j) {
  if (j.half_bandwidth() == 0) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < j.dim(); ++i) m = std::max(m, j(i, i));
    return m;
  }
  const BandMatrix jt = j.transpose();
  const auto r = extreme_eigenvalues(
      [&](const Vector& v) {
        Vector a = j.multiply(v);
        const Vector b = jt.multiply(v);
        for (std::size_t i = 0; i < a.size(); ++i) a[i] = 0.5 * (a[i] + b[i]);
        return a;
      },
      j.dim(), 1e-8, 10 * j.dim());
  return r.max;
}

}  // namespace

const char* to_string(MVariant v) noexcept {
  return v == MVariant::kExpectationOfNorm ? "expectation_of_norm"
                                           : "expectation_of_norm_squared";
}

const char* to_string(NoiseClass n) noexcept {
  return n == NoiseClass::kAdditive ? "additive" : "multiplicative";
}

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::kContractive:
      return "contractive";
    case Verdict::kNotContractive:
      return "not_contractive";
    case Verdict::kIndeterminate:
      break;
  }
  return "indeterminate";
}

AnalysisConstants AnalysisConstants::make(double norm_A, double M, MVariant variant, double L_g,
                                          double mu, double L) {
  AnalysisConstants c;
  c.norm_A = norm_A;
  c.M = M;
  c.m_variant = variant;
  c.L_g = L_g;
  c.mu = mu;
  c.mu_star = norm_A + mu;
  c.L = L;
  return c;
}

void validate(const AnalysisConstants& c) {
  if (!(c.norm_A >= 0.0) || !(c.M >= 0.0) || !(c.L_g >= 0.0) || !(c.L >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "analysis constants: norm_A, M, L_g and L must be non-negative");
  }
  if (!std::isfinite(c.mu) || c.mu_star != c.norm_A + c.mu) {
    throw Error(ErrorCode::kInvalidArgument, "analysis constants: mu_star must equal norm_A + mu");
  }
}

ResolventSolver::ResolventSolver(const BandMatrix& a, double theta, double dt)
    : theta_(theta), dt_(dt), lu_(BandMatrix::identity(a.dim()) + (theta * dt) * a) {}

ResolventSolver matrix_D(const BandMatrix& a, double theta, double dt) {
  return ResolventSolver(a, theta, dt);
}

LemmaBounds lemma_bounds(double norm_A, double theta, double dt) {
  LemmaBounds b;
  const double den = 1.0 - theta * dt * norm_A;
  b.valid = den > 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  b.bound_D = den == 0.0 ? inf : 1.0 / den;
  b.bound_C = den == 0.0 ? inf : (1.0 + (1.0 - theta) * dt * norm_A) / den;
  return b;
}

double alpha_theta_additive(const AnalysisConstants& c, double theta, double dt) {
  const double s = c.norm_A + c.M;
  const double r = checked_ratio(1.0 + (1.0 - theta) * dt * s, 1.0 - theta * dt * s,
                                 "alpha_theta_additive");
  return r * r;
}

double alpha_theta_multiplicative(const AnalysisConstants& c, double theta, double dt) {
  const double s = c.norm_A + c.M;
  const double num = 1.0 + (1.0 - theta) * dt * s;
  const double den = 1.0 - theta * dt * s;
  return checked_ratio(num * num + c.L_g * c.L_g * dt, den * den, "alpha_theta_multiplicative");
}

double alpha_imex_additive(const AnalysisConstants& c, double theta, double dt) {
  const double r = checked_ratio(1.0 + (1.0 - theta) * dt * c.norm_A + dt * c.M,
                                 1.0 - theta * dt * c.norm_A, "alpha_imex_additive");
  return r * r;
}

double alpha_imex_multiplicative(const AnalysisConstants& c, double theta, double dt) {
  const double num = 1.0 + (1.0 - theta) * dt * c.norm_A + dt * c.M;
  const double den = 1.0 - theta * dt * c.norm_A;
  return checked_ratio(num * num + c.L_g * c.L_g * dt, den * den, "alpha_imex_multiplicative");
}

double gamma_monotonicity(const AnalysisConstants& c, double theta, double dt) {
  const double a = c.norm_A;
  const double w = 1.0 - theta;
  const double num = 1.0 + w * w * dt * dt * (a * a + c.M + 2.0 * a * c.mu) + c.L * dt +
                     w * dt * c.mu_star;
  return checked_ratio(num, 1.0 - 2.0 * theta * dt * c.mu_star, "gamma_monotonicity");
}

bool problem_dissipativity(const AnalysisConstants& c) { return 2.0 * c.mu_star + c.L < 0.0; }

ContractivityReport evaluate_predicates(const AnalysisConstants& c, Scheme scheme,
                                        NoiseClass noise, double theta, double dt, double dx,
                                        int order_p, std::size_t n_steps, Framework framework) {
  validate(c);
  if (!(theta >= 0.0 && theta <= 1.0) || !(dt >= 0.0) || !(dx > 0.0) || order_p <= 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "evaluate_predicates: need theta in [0,1], dt >= 0, dx > 0, p > 0");
  }
  if (framework == Framework::kOneSidedLipschitz && scheme != Scheme::kThetaMaruyama) {
    throw Error(ErrorCode::kUnsupportedCombination,
                "the one-sided Lipschitz (gamma) analysis covers the theta-Maruyama scheme only");
  }

  ContractivityReport r;
  r.scheme = scheme;
  r.noise = noise;
  r.framework = framework;
  r.theta = theta;
  r.dt = dt;
  r.dx = dx;
  r.order_p = order_p;
  r.n_steps = n_steps;
  r.constants = c;

  const double a = c.norm_A;
  const double m = c.M;
  const double lg2 = c.L_g * c.L_g;
  const double one_m_2th = 1.0 - 2.0 * theta;
  const double dxp = std::pow(dx, order_p);
  const double norm_B = a * dxp;

  r.predicates["dissipative"] = problem_dissipativity(c);
  if (scheme == Scheme::kThetaMaruyama) {
    const double w = 1.0 - theta;
    const double k = a * a + m + 2.0 * a * c.mu;
    r.predicates["condcontr"] =
        w * w * dt * k + c.L + w * c.mu_star < -2.0 * theta * c.mu_star;
  }

  double (*coefficient)(const AnalysisConstants&, double, double) = nullptr;
  double denominator = 1.0;

  if (framework == Framework::kOneSidedLipschitz) {
    coefficient = gamma_monotonicity;
    denominator = 1.0 - 2.0 * theta * dt * c.mu_star;
    r.deciding_condition = "condcontr";
    const double w = 1.0 - theta;
    const double k = a * a + m + 2.0 * a * c.mu;
    const double slope = w * w * k;
    const double rhs = -2.0 * theta * c.mu_star - c.L - w * c.mu_star;
    if (slope > 0.0) {
      r.dt_bound = rhs / slope;
      r.dt_bound_kind = BoundKind::kUpper;
    } else if (slope < 0.0) {
      r.dt_bound = rhs / slope;
      r.dt_bound_kind = BoundKind::kLower;
    }
  } else if (scheme == Scheme::kThetaMaruyama) {
    const double s = a + m;
    denominator = 1.0 - theta * dt * s;
    if (noise == NoiseClass::kAdditive) {
      coefficient = alpha_theta_additive;
      r.deciding_condition = "eqpar";
      r.predicates["eqpar"] = one_m_2th * dt * s < -2.0;
      if (one_m_2th != 0.0 && s > 0.0) {
        r.dt_bound = -2.0 / (one_m_2th * s);
        r.dt_bound_kind = one_m_2th > 0.0 ? BoundKind::kUpper : BoundKind::kLower;
      }
    } else {
      coefficient = alpha_theta_multiplicative;
      r.deciding_condition = "eqpar2multheta";
      r.predicates["eqpar2multheta"] = dt * (2.0 * s + dt * one_m_2th * s * s + lg2) < 0.0;
      if (one_m_2th != 0.0 && s > 0.0) {
        r.dt_bound = -(2.0 * s + lg2) / (one_m_2th * s * s);
        r.dt_bound_kind = one_m_2th > 0.0 ? BoundKind::kUpper : BoundKind::kLower;
      }
    }
  } else {
    denominator = 1.0 - theta * dt * a;
    if (noise == NoiseClass::kAdditive) {
      coefficient = alpha_imex_additive;
      r.deciding_condition = "eqpar2bis";
      r.predicates["eqpar3"] = dt * (2.0 * (1.0 - theta * dt * a) + dt * (a + m)) < 0.0;
      r.predicates["eqpar2bis"] = 2.0 + dt * (m + one_m_2th * a) < 0.0;
      const double s = m + one_m_2th * a;
      if (s != 0.0) {
        r.dt_bound = -2.0 / s;
        r.dt_bound_kind = s > 0.0 ? BoundKind::kUpper : BoundKind::kLower;
      }
      if (one_m_2th <= 0.0 && m > 0.0) {
        r.dx_bound = std::pow(-one_m_2th * norm_B / m, 1.0 / order_p);
      }
    } else {
      coefficient = alpha_imex_multiplicative;
      r.deciding_condition = "eqpar2";
      const double q = m * m + one_m_2th * a * a + 2.0 * (1.0 - theta) * m * a;
      const double lin = 2.0 * m + 2.0 * a + lg2;
      r.predicates["eqpar2"] = dt * (dt * q + lin) < 0.0;
      if (q != 0.0) {
        r.dt_bound = -lin / q;
        r.dt_bound_kind = q > 0.0 ? BoundKind::kUpper : BoundKind::kLower;
      }
      if (one_m_2th <= 0.0) {
        r.note = "admissible dx^p interval (-|B|(1+2 theta)/M, -|B|/M) is empty";
      }
    }
  }

  r.valid = denominator > 0.0;
  try {
    r.alpha = coefficient(c, theta, dt);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kDivisionByZero) throw;
    r.alpha = std::numeric_limits<double>::infinity();
    r.alpha_n = r.alpha;
    r.valid = false;
    r.verdict = Verdict::kIndeterminate;
    r.note = "coefficient denominator vanishes";
    return r;
  }
  r.alpha_n = std::pow(r.alpha, static_cast<double>(n_steps));

  if (framework == Framework::kLemma && scheme == Scheme::kThetaMaruyama && theta == 0.5) {
    r.verdict = Verdict::kIndeterminate;
    r.note = "theta = 1/2 is not covered by the theta-method contractivity analysis "
             "(the bound degenerates there); use the IMEX or one-sided Lipschitz analysis";
    return r;
  }
  r.verdict = r.alpha < 1.0 ? Verdict::kContractive : Verdict::kNotContractive;
  if (!r.valid && r.note.empty()) {
    r.note = "coefficient denominator is not positive; the norm estimates behind it do not hold";
  }
  if (theta < 0.5 && framework == Framework::kLemma && r.note.empty()) {
    r.note = "theta < 1/2: the contractivity condition cannot hold for any dt > 0";
  }
  return r;
}

nlohmann::json to_json(const ContractivityReport& r) {
  nlohmann::json j;
  j["scheme"] = to_string(r.scheme);
  j["noise"] = to_string(r.noise);
  j["framework"] = r.framework == Framework::kLemma ? "lemma" : "one_sided_lipschitz";
  j["theta"] = r.theta;
  j["dt"] = r.dt;
  j["dx"] = r.dx;
  j["p"] = r.order_p;
  j["n_steps"] = r.n_steps;
  j["norm_A"] = r.constants.norm_A;
  j["M"] = r.constants.M;
  j["m_variant"] = to_string(r.constants.m_variant);
  j["L_g"] = r.constants.L_g;
  j["mu"] = r.constants.mu;
  j["mu_star"] = r.constants.mu_star;
  j["L"] = r.constants.L;
  j["alpha_star"] = 2.0 * r.constants.mu_star + r.constants.L;
  j["alpha"] = std::isfinite(r.alpha) ? nlohmann::json(r.alpha) : nlohmann::json(nullptr);
  j["alpha_n"] = std::isfinite(r.alpha_n) ? nlohmann::json(r.alpha_n) : nlohmann::json(nullptr);
  j["valid"] = r.valid;
  for (const auto& [name, value] : r.predicates) j[name] = value;
  j["deciding_condition"] = r.deciding_condition;
  j["dt_bound"] = r.dt_bound ? nlohmann::json(*r.dt_bound) : nlohmann::json(nullptr);
  j["dt_bound_kind"] = !r.dt_bound_kind ? nlohmann::json(nullptr)
                       : *r.dt_bound_kind == BoundKind::kUpper ? nlohmann::json("upper")
                                                               : nlohmann::json("lower");
  j["dx_bound"] = r.dx_bound ? nlohmann::json(*r.dx_bound) : nlohmann::json(nullptr);
  j["verdict"] = to_string(r.verdict);
  j["note"] = r.note;
  return j;
}

std::string human_readable(const ContractivityReport& r) {
  std::ostringstream os;
  os.precision(6);
  os << "scheme " << to_string(r.scheme) << ", " << to_string(r.noise) << " noise, theta "
     << r.theta << ", dt " << r.dt << ", dx " << r.dx << "\n";
  os << "  |A| = " << r.constants.norm_A << ", M = " << r.constants.M << " ("
     << to_string(r.constants.m_variant) << "), L_g = " << r.constants.L_g
     << ", mu* = " << r.constants.mu_star << ", L = " << r.constants.L << "\n";
  os << "  " << (r.framework == Framework::kLemma ? "alpha" : "gamma") << " = " << r.alpha
     << " (valid: " << (r.valid ? "yes" : "no") << "), over " << r.n_steps
     << " steps: " << r.alpha_n << "\n";
  for (const auto& [name, value] : r.predicates) {
    os << "  " << name << ": " << (value ? "holds" : "fails") << "\n";
  }
  if (r.dt_bound) {
    os << "  dt " << (*r.dt_bound_kind == BoundKind::kUpper ? "<" : ">") << " " << *r.dt_bound
       << "\n";
  }
  if (r.dx_bound) os << "  dx < " << *r.dx_bound << "\n";
  os << "verdict: " << to_string(r.verdict) << " (decided by " << r.deciding_condition << ")";
  if (!r.note.empty()) os << "\nnote: " << r.note;
  os << "\n";
  return os.str();
}

MEstimate estimate_M(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                     std::span<const double> u0, std::size_t n_paths, MVariant variant,
                     std::uint64_t seed, bool sample_one_sided, std::size_t workers) {
  if (n_paths == 0) throw Error(ErrorCode::kInvalidArgument, "estimate_M: n_paths must be >= 1");
  if (u0.size() != problem.state_dim()) {
    throw Error(ErrorCode::kDimensionMismatch, "estimate_M: initial state length mismatch");
  }
  const Stepper stepper(problem, cfg);
  const std::size_t steps = cfg.n_steps + 1;
  const std::size_t dim = problem.state_dim();

  struct PathSample {
    Vector norms;  // per step, truncated at blow-up
    bool blew_up = false;
    double max_abs = 0.0;
    double max_sym = -std::numeric_limits<double>::infinity();
  };
  std::vector<PathSample> samples(n_paths);

  parallel_for(n_paths, workers == 0 ? default_worker_count() : workers, [&](std::size_t path) {
    PathSample& s = samples[path];
    s.norms.reserve(steps);
    auto rng = path_rng(seed, path);
    Vector u(u0.begin(), u0.end());
    for (std::size_t n = 0; n < steps; ++n) {
      if (n > 0) {
        Vector dw = sample_wiener_increments(rng, dim, cfg.dt);
        for (auto& v : dw) v *= stepper.noise_scale();
        StepResult st = stepper.step(u, dw);
        if (!st.ok()) {
          s.blew_up = true;
          break;
        }
        u = std::move(st.x);
      }
      const BandMatrix jac = problem.reaction_jacobian(u);
      const double nrm = jacobian_norm(jac);
      s.norms.push_back(variant == MVariant::kExpectationOfNormSquared ? nrm * nrm : nrm);
      for (double v : u) s.max_abs = std::max(s.max_abs, std::abs(v));
      if (sample_one_sided) s.max_sym = std::max(s.max_sym, max_sym_eigenvalue(jac));
    }
  });

  MEstimate est;
  est.n_paths = n_paths;
  std::size_t blown = 0;
  double best = -1.0;
  for (const auto& s : samples) {
    blown += s.blew_up ? 1 : 0;
    est.max_abs_state = std::max(est.max_abs_state, s.max_abs);
  }
  if (sample_one_sided) {
    double m = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) m = std::max(m, s.max_sym);
    est.max_sym_eigenvalue = m;
  }
  for (std::size_t n = 0; n < steps; ++n) {
    double sum = 0.0;
    double sumsq = 0.0;
    std::size_t count = 0;
    for (const auto& s : samples) {
      if (n < s.norms.size()) {
        sum += s.norms[n];
        sumsq += s.norms[n] * s.norms[n];
        ++count;
      }
    }
    if (count == 0) break;
    const double mean = sum / static_cast<double>(count);
    if (mean > best) {
      best = mean;
      est.argmax_step = n;
      double var = 0.0;
      if (count > 1) {
        var = std::max(0.0, (sumsq - static_cast<double>(count) * mean * mean) /
                                static_cast<double>(count - 1));
      }
      est.standard_error = std::sqrt(var / static_cast<double>(count));
    }
  }
  est.value = std::max(best, 0.0);
  est.blowup_fraction = static_cast<double>(blown) / static_cast<double>(n_paths);
  est.reliable = est.blowup_fraction <= 0.5;
  return est;
}

DerivedConstants derive_constants(const SemiDiscreteProblem& problem, const SchemeConfig& cfg,
                                  std::span<const double> u0, std::size_t n_paths,
                                  MVariant variant, std::uint64_t seed, std::size_t workers) {
  const bool analytic_mu = problem.name == "ginzburg_landau" || problem.name == "uncoupled";
  DerivedConstants out;
  out.m_estimate = estimate_M(problem, cfg, u0, n_paths, variant, seed, !analytic_mu, workers);

  const double norm_A = spectral_norm(problem.op);
  double mu = 1.0;  // sup of 1 - 3u^2 (and of the linear block), attained at u = 0
  out.mu_source = "analytic";
  if (!analytic_mu) {
    mu = *out.m_estimate.max_sym_eigenvalue;
    out.mu_source = "sampled";
  }

  double L_g = 0.0;
  if (std::holds_alternative<noise::Additive>(problem.noise)) {
    out.lipschitz_source = "additive: 0";
  } else if (std::holds_alternative<noise::MultiplicativeLinear>(problem.noise)) {
    L_g = 1.0;
    out.lipschitz_source = "linear: 1";
  } else if (std::holds_alternative<noise::MultiplicativeQuadratic>(problem.noise)) {
    L_g = 2.0 * out.m_estimate.max_abs_state;
    std::ostringstream os;
    os << "quadratic: 2 * radius, radius = " << out.m_estimate.max_abs_state;
    out.lipschitz_source = os.str();
  } else {
    throw Error(ErrorCode::kUnsupportedCombination,
                "derive_constants: Lipschitz constant of a custom diffusion must be supplied");
  }
  out.constants =
      AnalysisConstants::make(norm_A, out.m_estimate.value, variant, L_g, mu, L_g * L_g);
  return out;
}

}  // namespace spde
