#include "spde/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "spde/error.hpp"

namespace spde {

GridSpec build_grid(double x_left, double x_right, std::size_t n_points) {
  if (!(x_right > x_left) || !std::isfinite(x_left) || !std::isfinite(x_right)) {
    throw Error(ErrorCode::kInvalidDomain, "build_grid: need x_right > x_left");
  }
  if (n_points < 4) {
    throw Error(ErrorCode::kInvalidDomain,
                "build_grid: need at least 4 points, got " + std::to_string(n_points));
  }
  GridSpec g;
  g.x_left = x_left;
  g.x_right = x_right;
  g.n_points = n_points;
  g.dx = (x_right - x_left) / static_cast<double>(n_points);
  return g;
}

BandMatrix assemble_neg_laplacian(const GridSpec& grid) {
  if (grid.n_points < 4 || !(grid.dx > 0.0)) {
    throw Error(ErrorCode::kInvalidDomain, "assemble_neg_laplacian: invalid grid");
  }
  const std::size_t d = grid.unknowns();
  const double s = 1.0 / (grid.dx * grid.dx);
  BandMatrix a(d, 1);
  for (std::size_t i = 0; i < d; ++i) {
    a.at(i, i) = 2.0 * s;
    if (i > 0) a.at(i, i - 1) = -s;
    if (i + 1 < d) a.at(i, i + 1) = -s;
  }
  return a;
}

BandMatrix assemble_biharmonic(const GridSpec& grid) {
  if (grid.n_points < 6) {
    throw Error(ErrorCode::kGridTooSmall,
                "assemble_biharmonic: need at least 5 unknowns (n_points >= 6)");
  }
  const BandMatrix l = assemble_neg_laplacian(grid);
  return l * l;
}

double neg_laplacian_max_eigenvalue(std::size_t order, double dx) {
  const double d = static_cast<double>(order);
  return (2.0 - 2.0 * std::cos(d * std::numbers::pi / (d + 1.0))) / (dx * dx);
}

double neg_laplacian_min_eigenvalue(std::size_t order, double dx) {
  const double d = static_cast<double>(order);
  return (2.0 - 2.0 * std::cos(std::numbers::pi / (d + 1.0))) / (dx * dx);
}

}  // namespace spde
