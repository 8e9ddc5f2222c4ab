#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "spde/error.hpp"
#include "spde/grid.hpp"

namespace spde {

namespace {

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Deterministic start vector without the reflection symmetry of all-ones,
// which is orthogonal to half of the Toeplitz eigenvectors.
Vector start_vector(std::size_t dim) {
  Vector v(dim);
  std::uint64_t state = 0x9E3779B97F4A7C15ULL;
  for (auto& x : v) {
    state += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    x = 0.5 + static_cast<double>(z >> 11) * 0x1.0p-53;
  }
  const double nrm = std::sqrt(dot(v, v));
  for (auto& x : v) x /= nrm;
  return v;
}

}  // namespace

EigenRange extreme_eigenvalues(const std::function<Vector(const Vector&)>& apply,
                               std::size_t dim, double tol, std::size_t max_iter) {
  if (dim == 0) return {};
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eigen solver: tol must be > 0");

  std::vector<Vector> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples basis j and j+1
  basis.push_back(start_vector(dim));

  const std::size_t steps = std::min(dim, max_iter);
  EigenRange out;
  for (std::size_t j = 0; j < steps; ++j) {
    Vector w = apply(basis[j]);
    const double a = dot(w, basis[j]);
    alpha.push_back(a);
    // Full reorthogonalization, twice for stability.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : basis) {
        const double h = dot(w, q);
        for (std::size_t i = 0; i < dim; ++i) w[i] -= h * q[i];
      }
    }
    const double b = std::sqrt(dot(w, w));

    const std::size_t m = alpha.size();
    Eigen::VectorXd diag(m);
    Eigen::VectorXd sub(m > 1 ? m - 1 : 0);
    for (std::size_t i = 0; i < m; ++i) diag[static_cast<Eigen::Index>(i)] = alpha[i];
    for (std::size_t i = 0; i + 1 < m; ++i) sub[static_cast<Eigen::Index>(i)] = beta[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    const auto& evals = es.eigenvalues();
    const auto& evecs = es.eigenvectors();
    const auto last = static_cast<Eigen::Index>(m - 1);
    out.min = evals[0];
    out.max = evals[last];
    out.iterations = m;

    const double scale = std::max(std::abs(out.min), std::abs(out.max));
    const double res_min = std::abs(b * evecs(last, 0));
    const double res_max = std::abs(b * evecs(last, last));
    const double exhausted = 1e-13 * std::max(scale, 1e-300);
    if (b <= exhausted || (res_min <= tol * scale && res_max <= tol * scale) ||
        scale == 0.0) {
      return out;
    }
    if (m == dim) return out;  // Krylov space exhausted

    beta.push_back(b);
    for (auto& x : w) x /= b;
    basis.push_back(std::move(w));
  }
  throw Error(ErrorCode::kNonConvergence,
              "eigen solver: no convergence after " + std::to_string(steps) + " iterations");
}

double spectral_norm(const BandMatrix& m, double tol) {
  if (m.dim() == 0) return 0.0;
  const auto r = extreme_eigenvalues([&](const Vector& v) { return m.multiply(v); }, m.dim(),
                                     tol, 10 * m.dim());
  return std::max(std::abs(r.min), std::abs(r.max));
}

double operator_norm(const BandMatrix& m, double tol) {
  if (m.dim() == 0) return 0.0;
  if (m.half_bandwidth() == 0) return m.max_abs();
  const auto r = extreme_eigenvalues(
      [&](const Vector& v) { return m.multiply_transpose(m.multiply(v)); }, m.dim(), tol,
      10 * m.dim());
  return std::sqrt(std::max(r.max, 0.0));
}

}  // namespace spde
