#pragma once

#include "spde/grid.hpp"
#include "spde/problems.hpp"

namespace fixture {

/// dU = (-A U + c U) dt + g(U) dW with A the negative Laplacian. Linear, so
/// under additive noise the deviation Z = U - Y is deterministic.
inline spde::SemiDiscreteProblem linear_problem(const spde::GridSpec& grid, spde::NoiseKind noise,
                                                double c = 1.0) {
  spde::CustomProblemSpec s;
  s.name = "linear";
  s.grid = grid;
  s.op = spde::assemble_neg_laplacian(grid);
  s.reaction = [c](std::span<const double> u) {
    spde::Vector r(u.begin(), u.end());
    for (auto& v : r) v *= c;
    return r;
  };
  s.reaction_jacobian = [c](std::span<const double> u) {
    return spde::BandMatrix::diagonal(spde::Vector(u.size(), c));
  };
  s.noise = std::move(noise);
  return spde::make_custom(std::move(s));
}

/// dU = (-a U - b U) dt + g(U) dW: a scalar-multiple-of-identity operator and
/// a strictly dissipative reaction, so the one-sided Lipschitz analysis can
/// certify contraction.
inline spde::SemiDiscreteProblem dissipative_problem(const spde::GridSpec& grid,
                                                     spde::NoiseKind noise, double a, double b) {
  spde::CustomProblemSpec s;
  s.name = "dissipative";
  s.grid = grid;
  s.op = spde::BandMatrix::diagonal(spde::Vector(grid.unknowns(), a));
  s.reaction = [b](std::span<const double> u) {
    spde::Vector r(u.begin(), u.end());
    for (auto& v : r) v *= -b;
    return r;
  };
  s.reaction_jacobian = [b](std::span<const double> u) {
    return spde::BandMatrix::diagonal(spde::Vector(u.size(), -b));
  };
  s.noise = std::move(noise);
  return spde::make_custom(std::move(s));
}

inline spde::DibParams sample_dib() {
  return {1.0, 20.0, 1.5, 1.0, 0.8, 0.5, 0.3, 1.2, 0.7, 0.2, 0.5, 0.4};
}

}  // namespace fixture
