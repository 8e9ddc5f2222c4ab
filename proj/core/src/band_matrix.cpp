#include "spde/band_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "spde/error.hpp"

namespace spde {

namespace {

void require_dim(std::size_t expected, std::size_t got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": expected length " + std::to_string(expected) +
                    ", got " + std::to_string(got));
  }
}

}  // namespace

BandMatrix::BandMatrix(std::size_t dim, std::size_t half_bandwidth)
    : dim_(dim),
      k_(dim == 0 ? 0 : std::min(half_bandwidth, dim - 1)),
      bands_(dim * (2 * k_ + 1), 0.0) {}

BandMatrix BandMatrix::identity(std::size_t dim) {
  BandMatrix m(dim, 0);
  std::fill(m.bands_.begin(), m.bands_.end(), 1.0);
  return m;
}

BandMatrix BandMatrix::diagonal(std::span<const double> diag) {
  BandMatrix m(diag.size(), 0);
  std::copy(diag.begin(), diag.end(), m.bands_.begin());
  return m;
}

double BandMatrix::operator()(std::size_t i, std::size_t j) const {
  if (!in_band(i, j)) return 0.0;
  return bands_[i * width() + (j + k_ - i)];
}

double& BandMatrix::at(std::size_t i, std::size_t j) {
  if (i >= dim_ || j >= dim_ || !in_band(i, j)) {
    throw Error(ErrorCode::kInvalidArgument,
                "BandMatrix::at(" + std::to_string(i) + ", " + std::to_string(j) +
                    ") is outside the band");
  }
  return bands_[i * width() + (j + k_ - i)];
}

Vector BandMatrix::multiply(std::span<const double> x) const {
  require_dim(dim_, x.size(), "BandMatrix::multiply");
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= k_ ? i - k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + k_);
    const double* row = &bands_[i * width() + (k_ - i)];
    double acc = 0.0;
    for (std::size_t j = j0; j <= j1; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
  return y;
}

Vector BandMatrix::multiply_transpose(std::span<const double> x) const {
  require_dim(dim_, x.size(), "BandMatrix::multiply_transpose");
  Vector y(dim_, 0.0);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= k_ ? i - k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + k_);
    const double* row = &bands_[i * width() + (k_ - i)];
    for (std::size_t j = j0; j <= j1; ++j) y[j] += row[j] * x[i];
  }
  return y;
}

BandMatrix BandMatrix::transpose() const {
  BandMatrix t(dim_, k_);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= k_ ? i - k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + k_);
    for (std::size_t j = j0; j <= j1; ++j) t.at(j, i) = (*this)(i, j);
  }
  return t;
}

BandMatrix BandMatrix::widened(std::size_t half_bandwidth) const {
  if (half_bandwidth <= k_) return *this;
  BandMatrix w(dim_, half_bandwidth);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= k_ ? i - k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + k_);
    for (std::size_t j = j0; j <= j1; ++j) w.at(i, j) = (*this)(i, j);
  }
  return w;
}

bool BandMatrix::is_symmetric(double tol) const {
  for (std::size_t i = 0; i < dim_; ++i) {
    for (std::size_t j = i + 1; j <= std::min(dim_ - 1, i + k_); ++j) {
      if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    }
  }
  return true;
}

double BandMatrix::max_abs() const {
  double m = 0.0;
  for (double v : bands_) m = std::max(m, std::abs(v));
  return m;
}

BandMatrix& BandMatrix::operator*=(double s) {
  for (double& v : bands_) v *= s;
  return *this;
}

BandMatrix& BandMatrix::operator+=(const BandMatrix& other) {
  require_dim(dim_, other.dim_, "BandMatrix::operator+=");
  if (other.k_ > k_) *this = widened(other.k_);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= other.k_ ? i - other.k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + other.k_);
    for (std::size_t j = j0; j <= j1; ++j) at(i, j) += other(i, j);
  }
  return *this;
}

BandMatrix& BandMatrix::operator-=(const BandMatrix& other) {
  require_dim(dim_, other.dim_, "BandMatrix::operator-=");
  if (other.k_ > k_) *this = widened(other.k_);
  for (std::size_t i = 0; i < dim_; ++i) {
    const std::size_t j0 = i >= other.k_ ? i - other.k_ : 0;
    const std::size_t j1 = std::min(dim_ - 1, i + other.k_);
    for (std::size_t j = j0; j <= j1; ++j) at(i, j) -= other(i, j);
  }
  return *this;
}

BandMatrix operator*(const BandMatrix& a, const BandMatrix& b) {
  require_dim(a.dim_, b.dim_, "BandMatrix product");
  const std::size_t n = a.dim_;
  BandMatrix c(n, a.k_ + b.k_);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t l0 = i >= a.k_ ? i - a.k_ : 0;
    const std::size_t l1 = std::min(n - 1, i + a.k_);
    for (std::size_t l = l0; l <= l1; ++l) {
      const double ail = a(i, l);
      if (ail == 0.0) continue;
      const std::size_t j0 = l >= b.k_ ? l - b.k_ : 0;
      const std::size_t j1 = std::min(n - 1, l + b.k_);
      for (std::size_t j = j0; j <= j1; ++j) c.at(i, j) += ail * b(l, j);
    }
  }
  return c;
}

bool operator==(const BandMatrix& a, const BandMatrix& b) {
  if (a.dim_ != b.dim_) return false;
  const std::size_t k = std::max(a.k_, b.k_);
  for (std::size_t i = 0; i < a.dim_; ++i) {
    const std::size_t j0 = i >= k ? i - k : 0;
    const std::size_t j1 = std::min(a.dim_ - 1, i + k);
    for (std::size_t j = j0; j <= j1; ++j) {
      if (a(i, j) != b(i, j)) return false;
    }
  }
  return true;
}

BandMatrix interleave_block_diagonal(std::span<const BandMatrix> blocks) {
  if (blocks.empty()) {
    throw Error(ErrorCode::kEmptyInput, "interleave_block_diagonal: no blocks");
  }
  const std::size_t c = blocks.size();
  const std::size_t nodes = blocks.front().dim();
  std::size_t k = 0;
  for (const auto& b : blocks) {
    require_dim(nodes, b.dim(), "interleave_block_diagonal");
    k = std::max(k, b.half_bandwidth());
  }
  BandMatrix m(nodes * c, k * c);
  for (std::size_t p = 0; p < c; ++p) {
    const BandMatrix& b = blocks[p];
    for (std::size_t i = 0; i < nodes; ++i) {
      const std::size_t j0 = i >= k ? i - k : 0;
      const std::size_t j1 = std::min(nodes - 1, i + k);
      for (std::size_t j = j0; j <= j1; ++j) {
        const double v = b(i, j);
        if (v != 0.0) m.at(i * c + p, j * c + p) = v;
      }
    }
  }
  return m;
}

BandedLU::BandedLU(const BandMatrix& m, double pivot_tol)
    : n_(m.dim()),
      k_(m.half_bandwidth()),
      w_(3 * k_ + 1),
      lu_(n_ * w_, 0.0),
      multipliers_(n_ * k_, 0.0),
      pivots_(n_, 0) {
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t j0 = i >= k_ ? i - k_ : 0;
    const std::size_t j1 = std::min(n_ - 1, i + k_);
    for (std::size_t j = j0; j <= j1; ++j) u(i, j) = m(i, j);
  }
  const double threshold = pivot_tol * m.max_abs();

  for (std::size_t c = 0; c < n_; ++c) {
    const std::size_t last_row = std::min(n_ - 1, c + k_);
    const std::size_t last_col = std::min(n_ - 1, c + 2 * k_);

    std::size_t p = c;
    double best = std::abs(u(c, c));
    for (std::size_t r = c + 1; r <= last_row; ++r) {
      if (std::abs(u(r, c)) > best) {
        best = std::abs(u(r, c));
        p = r;
      }
    }
    if (!(best > threshold) || best == 0.0) {
      throw Error(ErrorCode::kSingularMatrix,
                  "banded LU: pivot " + std::to_string(best) + " in column " +
                      std::to_string(c) + " below threshold");
    }
    pivots_[c] = p;
    if (p != c) {
      for (std::size_t j = c; j <= last_col; ++j) std::swap(u(c, j), u(p, j));
    }

    const double pivot = u(c, c);
    for (std::size_t r = c + 1; r <= last_row; ++r) {
      const double f = u(r, c) / pivot;
      multipliers_[c * k_ + (r - c - 1)] = f;
      u(r, c) = 0.0;
      if (f == 0.0) continue;
      for (std::size_t j = c + 1; j <= last_col; ++j) u(r, j) -= f * u(c, j);
    }
  }
}

Vector BandedLU::solve(std::span<const double> rhs) const {
  Vector x(rhs.begin(), rhs.end());
  solve_in_place(x);
  return x;
}

void BandedLU::solve_in_place(std::span<double> b) const {
  require_dim(n_, b.size(), "BandedLU::solve");
  for (std::size_t c = 0; c < n_; ++c) {
    if (pivots_[c] != c) std::swap(b[c], b[pivots_[c]]);
    const std::size_t last_row = std::min(n_ - 1, c + k_);
    for (std::size_t r = c + 1; r <= last_row; ++r) {
      b[r] -= multipliers_[c * k_ + (r - c - 1)] * b[c];
    }
  }
  for (std::size_t ii = n_; ii-- > 0;) {
    const std::size_t last_col = std::min(n_ - 1, ii + 2 * k_);
    double acc = b[ii];
    for (std::size_t j = ii + 1; j <= last_col; ++j) acc -= u(ii, j) * b[j];
    b[ii] = acc / u(ii, ii);
  }
}

Vector solve_banded(const BandMatrix& m, std::span<const double> rhs) {
  return BandedLU(m).solve(rhs);
}

}  // namespace spde
