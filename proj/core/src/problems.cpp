#include "spde/problems.hpp"

#include <cmath>
#include <sstream>

#include "spde/error.hpp"

namespace spde {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::function<Vector(std::span<const double>)> builtin_diffusion(const NoiseKind& kind) {
  if (std::holds_alternative<noise::Custom>(kind)) {
    throw Error(ErrorCode::kInvalidArgument,
                "custom noise needs a diffusion callback (use make_custom)");
  }
  return [kind](std::span<const double> u) { return apply_noise_map(kind, u); };
}

}  // namespace

bool is_additive(const NoiseKind& kind) {
  return std::holds_alternative<noise::Additive>(kind);
}

std::string describe(const NoiseKind& kind) {
  return std::visit(overloaded{
                        [](const noise::Additive& a) {
                          std::ostringstream os;
                          os << "additive(epsilon=" << a.epsilon << ")";
                          return os.str();
                        },
                        [](const noise::MultiplicativeLinear&) { return std::string("linear"); },
                        [](const noise::MultiplicativeQuadratic&) {
                          return std::string("quadratic");
                        },
                        [](const noise::Custom& c) { return "custom(" + c.tag + ")"; },
                    },
                    kind);
}

Vector apply_noise_map(const NoiseKind& kind, std::span<const double> state) {
  Vector g(state.size());
  std::visit(overloaded{
                 [&](const noise::Additive& a) { std::fill(g.begin(), g.end(), a.epsilon); },
                 [&](const noise::MultiplicativeLinear&) {
                   std::copy(state.begin(), state.end(), g.begin());
                 },
                 [&](const noise::MultiplicativeQuadratic&) {
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] = state[i] * state[i];
                 },
                 [&](const noise::Custom& c) {
                   throw Error(ErrorCode::kInvalidArgument,
                               "no built-in diffusion map for custom noise '" + c.tag + "'");
                 },
             },
             kind);
  return g;
}

Vector SemiDiscreteProblem::drift(std::span<const double> u) const {
  Vector f = reaction(u);
  const Vector au = op.multiply(u);
  for (std::size_t i = 0; i < f.size(); ++i) f[i] -= au[i];
  return f;
}

void validate(const DibParams& p) {
  const double all[] = {p.d1, p.d2, p.rho, p.A1, p.A2, p.B,     p.alpha,
                        p.C,  p.D,  p.gamma, p.k2, p.k3};
  for (double v : all) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidArgument, "DIB: non-finite parameter");
  }
  if (!(p.d1 > 0.0) || !(p.d2 > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "DIB: diffusivities d1, d2 must be positive");
  }
  if (!(p.rho > 0.0)) throw Error(ErrorCode::kInvalidArgument, "DIB: rho must be positive");
}

SemiDiscreteProblem make_ginzburg_landau(const GridSpec& grid, NoiseKind noise) {
  SemiDiscreteProblem p;
  p.name = "ginzburg_landau";
  p.grid = grid;
  p.op = assemble_neg_laplacian(grid);
  p.reaction = [](std::span<const double> u) {
    Vector r(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) r[i] = u[i] - u[i] * u[i] * u[i];
    return r;
  };
  p.reaction_jacobian = [](std::span<const double> u) {
    Vector d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = 1.0 - 3.0 * u[i] * u[i];
    return BandMatrix::diagonal(d);
  };
  p.diffusion = builtin_diffusion(noise);
  p.noise = std::move(noise);
  return p;
}

SemiDiscreteProblem make_cahn_hilliard(const GridSpec& grid, NoiseKind noise) {
  SemiDiscreteProblem p;
  p.name = "cahn_hilliard";
  p.grid = grid;
  p.op = assemble_biharmonic(grid);
  BandMatrix lap = assemble_neg_laplacian(grid);
  lap *= -1.0;
  p.reaction = [lap](std::span<const double> u) {
    Vector v(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) v[i] = 1.0 - 3.0 * u[i] * u[i];
    return lap.multiply(v);
  };
  p.reaction_jacobian = [lap](std::span<const double> u) {
    Vector d(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) d[i] = -6.0 * u[i];
    return lap * BandMatrix::diagonal(d);
  };
  p.diffusion = builtin_diffusion(noise);
  p.noise = std::move(noise);
  return p;
}

SemiDiscreteProblem make_uncoupled_system(const GridSpec& grid, NoiseKind noise) {
  SemiDiscreteProblem p;
  p.name = "uncoupled";
  p.grid = grid;
  p.n_components = 2;
  const BandMatrix a = assemble_neg_laplacian(grid);
  const BandMatrix blocks[] = {a, a};
  p.op = interleave_block_diagonal(blocks);
  p.reaction = [](std::span<const double> s) {
    Vector r(s.size());
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
      r[i] = s[i] - s[i] * s[i] * s[i];
      r[i + 1] = s[i + 1];
    }
    return r;
  };
  p.reaction_jacobian = [](std::span<const double> s) {
    Vector d(s.size());
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
      d[i] = 1.0 - 3.0 * s[i] * s[i];
      d[i + 1] = 1.0;
    }
    return BandMatrix::diagonal(d);
  };
  p.diffusion = builtin_diffusion(noise);
  p.noise = std::move(noise);
  return p;
}

SemiDiscreteProblem make_dib(const GridSpec& grid, const DibParams& q, NoiseKind noise) {
  validate(q);
  SemiDiscreteProblem p;
  p.name = "dib";
  p.grid = grid;
  p.n_components = 2;
  const BandMatrix a = assemble_neg_laplacian(grid);
  const BandMatrix blocks[] = {q.d1 * a, q.d2 * a};
  p.op = interleave_block_diagonal(blocks);
  p.reaction = [q](std::span<const double> s) {
    Vector r(s.size());
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
      const double u = s[i];
      const double v = s[i + 1];
      r[i] = q.rho * (q.A1 * (1.0 - v) * u - q.A2 * u * u * u - q.B * (v - q.alpha));
      r[i + 1] = q.rho * (q.C * (1.0 + q.k2 * u) * (1.0 - v) * (1.0 - q.gamma * (1.0 - v)) -
                          q.D * v * (1.0 + q.k3 * u) * (1.0 + q.gamma * v));
    }
    return r;
  };
  p.reaction_jacobian = [q](std::span<const double> s) {
    BandMatrix j(s.size(), 1);
    for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
      const double u = s[i];
      const double v = s[i + 1];
      const double w = 1.0 - v;
      j.at(i, i) = q.rho * (q.A1 * w - 3.0 * q.A2 * u * u);
      j.at(i, i + 1) = q.rho * (-q.A1 * u - q.B);
      j.at(i + 1, i) = q.rho * (q.C * q.k2 * w * (1.0 - q.gamma * w) -
                                q.D * v * q.k3 * (1.0 + q.gamma * v));
      j.at(i + 1, i + 1) = q.rho * (-q.C * (1.0 + q.k2 * u) * (1.0 - 2.0 * q.gamma * w) -
                                    q.D * (1.0 + q.k3 * u) * (1.0 + 2.0 * q.gamma * v));
    }
    return j;
  };
  p.diffusion = builtin_diffusion(noise);
  p.noise = std::move(noise);
  return p;
}

SemiDiscreteProblem make_custom(CustomProblemSpec spec) {
  if (!spec.reaction || !spec.reaction_jacobian) {
    throw Error(ErrorCode::kInvalidArgument, "custom problem: reaction and jacobian required");
  }
  if (spec.n_components == 0 || spec.op.dim() != spec.grid.unknowns() * spec.n_components) {
    throw Error(ErrorCode::kDimensionMismatch,
                "custom problem: operator dimension must equal unknowns * n_components");
  }
  SemiDiscreteProblem p;
  p.name = std::move(spec.name);
  p.grid = spec.grid;
  p.op = std::move(spec.op);
  p.n_components = spec.n_components;
  p.reaction = std::move(spec.reaction);
  p.reaction_jacobian = std::move(spec.reaction_jacobian);
  p.diffusion = spec.diffusion ? std::move(spec.diffusion) : builtin_diffusion(spec.noise);
  p.noise = std::move(spec.noise);
  return p;
}

Vector component(std::span<const double> state, std::size_t n_components, std::size_t c) {
  if (n_components == 0 || c >= n_components || state.size() % n_components != 0) {
    throw Error(ErrorCode::kDimensionMismatch, "component: bad component index or layout");
  }
  Vector out(state.size() / n_components);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = state[i * n_components + c];
  return out;
}

Vector interleave(std::span<const Vector> components) {
  if (components.empty()) return {};
  const std::size_t c = components.size();
  const std::size_t n = components.front().size();
  Vector out(n * c);
  for (std::size_t p = 0; p < c; ++p) {
    if (components[p].size() != n) {
      throw Error(ErrorCode::kDimensionMismatch, "interleave: component lengths differ");
    }
    for (std::size_t i = 0; i < n; ++i) out[i * c + p] = components[p][i];
  }
  return out;
}

}  // namespace spde
