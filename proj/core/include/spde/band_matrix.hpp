#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace spde {

using Vector = std::vector<double>;

/// Square matrix with equal lower and upper half-bandwidth k. Entries with
/// |i - j| > k are structurally zero and never stored.
///
/// Storage is row-major over the band: row i keeps the 2k+1 entries for
/// columns i-k .. i+k, padded with zeros where those columns fall outside
/// the matrix.
class BandMatrix {
 public:
  BandMatrix() = default;
  BandMatrix(std::size_t dim, std::size_t half_bandwidth);

  static BandMatrix identity(std::size_t dim);
  static BandMatrix diagonal(std::span<const double> diag);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t half_bandwidth() const noexcept { return k_; }
  std::span<const double> bands() const noexcept { return bands_; }

  bool in_band(std::size_t i, std::size_t j) const noexcept {
    return (i > j ? i - j : j - i) <= k_;
  }

  /// Zero for out-of-band positions.
  double operator()(std::size_t i, std::size_t j) const;
  /// Throws kInvalidArgument for out-of-band positions.
  double& at(std::size_t i, std::size_t j);

  /// y = M x
  Vector multiply(std::span<const double> x) const;
  /// y = M^T x
  Vector multiply_transpose(std::span<const double> x) const;

  BandMatrix transpose() const;
  /// Copy of this matrix stored with a wider band.
  BandMatrix widened(std::size_t half_bandwidth) const;
  bool is_symmetric(double tol = 0.0) const;
  double max_abs() const;

  BandMatrix& operator*=(double s);
  BandMatrix& operator+=(const BandMatrix& other);
  BandMatrix& operator-=(const BandMatrix& other);

  friend BandMatrix operator+(BandMatrix a, const BandMatrix& b) { return a += b; }
  friend BandMatrix operator-(BandMatrix a, const BandMatrix& b) { return a -= b; }
  friend BandMatrix operator*(double s, BandMatrix a) { return a *= s; }
  friend BandMatrix operator*(BandMatrix a, double s) { return a *= s; }

  /// Matrix product; the result has half-bandwidth k_a + k_b (capped at dim-1).
  friend BandMatrix operator*(const BandMatrix& a, const BandMatrix& b);

  friend bool operator==(const BandMatrix& a, const BandMatrix& b);

 private:
  std::size_t width() const noexcept { return 2 * k_ + 1; }

  std::size_t dim_ = 0;
  std::size_t k_ = 0;
  std::vector<double> bands_;
};

/// Block-diagonal matrix over an interleaved layout: with c components per
/// node, entry (node*c + p, node'*c + p) = blocks[p](node, node'). All
/// cross-component entries are zero.
BandMatrix interleave_block_diagonal(std::span<const BandMatrix> blocks);

/// LU factorization with partial pivoting restricted to the band. Row swaps
/// widen the upper band of U to 2k, so the factor keeps 3k+1 entries per row.
class BandedLU {
 public:
  /// Pivots with magnitude below pivot_tol * max|M| raise kSingularMatrix.
  explicit BandedLU(const BandMatrix& m, double pivot_tol = 1e-14);

  std::size_t dim() const noexcept { return n_; }

  Vector solve(std::span<const double> rhs) const;
  void solve_in_place(std::span<double> rhs) const;

 private:
  double& u(std::size_t i, std::size_t j) { return lu_[i * w_ + (j + k_ - i)]; }
  double u(std::size_t i, std::size_t j) const { return lu_[i * w_ + (j + k_ - i)]; }

  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::size_t w_ = 0;
  std::vector<double> lu_;
  std::vector<double> multipliers_;  // n_ * k_, column-major per pivot column
  std::vector<std::size_t> pivots_;
};

/// Solve m x = rhs through a one-shot BandedLU.
Vector solve_banded(const BandMatrix& m, std::span<const double> rhs);

}  // namespace spde
