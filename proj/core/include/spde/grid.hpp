#pragma once

#include <cstddef>
#include <functional>

#include "spde/band_matrix.hpp"

namespace spde {

/// Uniform partition x_i = x_left + i*dx, i = 0 .. n_points-1, with
/// dx = (x_right - x_left) / n_points.
///
/// x_0 = x_left and the (unstored) node x_{n_points} = x_right carry the
/// homogeneous Dirichlet data; the unknowns are the n_points - 1 nodes
/// strictly between them.
struct GridSpec {
  double x_left = 0.0;
  double x_right = 1.0;
  std::size_t n_points = 0;
  double dx = 0.0;

  std::size_t unknowns() const noexcept { return n_points - 1; }
  double node(std::size_t i) const noexcept { return x_left + static_cast<double>(i) * dx; }
  /// Position of unknown number j (node j+1).
  double unknown_node(std::size_t j) const noexcept { return node(j + 1); }
};

GridSpec build_grid(double x_left, double x_right, std::size_t n_points);

/// (1/dx^2) tridiag(-1, 2, -1) on the unknowns; symmetric positive definite.
BandMatrix assemble_neg_laplacian(const GridSpec& grid);

/// Square of the Dirichlet negative Laplacian, pentadiagonal with interior
/// stencil (1, -4, 6, -4, 1)/dx^4. Requires at least 5 unknowns.
BandMatrix assemble_biharmonic(const GridSpec& grid);

/// Largest eigenvalue of the Dirichlet negative Laplacian of order d:
/// (2 - 2 cos(d pi / (d+1))) / dx^2.
double neg_laplacian_max_eigenvalue(std::size_t order, double dx);
/// Smallest eigenvalue, (2 - 2 cos(pi / (d+1))) / dx^2.
double neg_laplacian_min_eigenvalue(std::size_t order, double dx);

struct EigenRange {
  double min = 0.0;
  double max = 0.0;
  std::size_t iterations = 0;
};

/// Extreme eigenvalues of a symmetric linear map given only through its
/// action. Lanczos with full reorthogonalization from a fixed pseudo-random
/// start vector; converges when both extreme Ritz residuals drop below
/// tol * max(|min|, |max|). Throws kNonConvergence after max_iter steps.
EigenRange extreme_eigenvalues(const std::function<Vector(const Vector&)>& apply,
                               std::size_t dim, double tol, std::size_t max_iter);

/// Largest absolute eigenvalue of a symmetric band matrix (its induced
/// 2-norm). Iteration cap is 10*dim.
double spectral_norm(const BandMatrix& m, double tol = 1e-8);

/// Induced 2-norm of a general band matrix, sqrt(lambda_max(M^T M)).
double operator_norm(const BandMatrix& m, double tol = 1e-8);

}  // namespace spde
