#pragma once

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace wht {

using Vector = std::vector<double>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Dense real matrix stored column-major: entry (i, j) lives at data[i + j * rows].
// Every module uses this order, so a column is a contiguous span.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major);

  /// Builds from nested row lists, e.g. {{1, 2}, {3, 4}}.
  static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(std::span<const double> d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i + j * rows_]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i + j * rows_]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }

  bool all_finite() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Sorted, duplicate-free coordinate positions.
class IndexSet {
 public:
  IndexSet() = default;
  /// Sorts and deduplicates.
  explicit IndexSet(std::vector<std::size_t> indices);

  static IndexSet support_of(std::span<const double> x);
  static IndexSet range(std::size_t n);

  std::size_t size() const { return idx_.size(); }
  bool empty() const { return idx_.empty(); }
  bool contains(std::size_t i) const;
  std::size_t operator[](std::size_t k) const { return idx_[k]; }
  auto begin() const { return idx_.begin(); }
  auto end() const { return idx_.end(); }
  const std::vector<std::size_t>& indices() const { return idx_; }

  friend bool operator==(const IndexSet&, const IndexSet&) = default;

 private:
  std::vector<std::size_t> idx_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> a);

/// y = A x. Zero entries of x are skipped, so sparse x costs O(rows * nnz).
Vector matvec(const DenseMatrix& a, std::span<const double> x);
/// y = A^T x.
Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x);
/// y = M x for symmetric M (same as matvec; named for call-site intent).
Vector symv(const DenseMatrix& m, std::span<const double> x);

/// A^T A, exactly symmetric on output.
DenseMatrix gram(const DenseMatrix& a);

/// True when Cholesky of M - shift I runs to completion with positive pivots.
/// Cheap certificate that lambda_min(M) > shift, up to rounding of order n eps ||M||.
bool cholesky_succeeds(const DenseMatrix& m, double shift = 0.0);

/// Solves M_{S,S} v = r by Cholesky. Returns nullopt when a pivot drops below
/// 1e-12 times the largest diagonal entry of M_{S,S}.
std::optional<Vector> solve_spd_restricted(const DenseMatrix& m, const IndexSet& s,
                                           std::span<const double> r);

struct EigenEstimate {
  double value = 0.0;
  Vector vector;
  bool converged = false;
  std::size_t iterations = 0;
};

/// Largest algebraic eigenvalue of a symmetric matrix.
///
/// Krylov (Lanczos) iteration with full reorthogonalization started from the
/// normalized all-ones vector. If the Krylov space becomes invariant before the
/// estimate converges, a seeded random vector orthogonal to the current basis
/// continues the process. Convergence: Ritz residual <= tol * |value|. The
/// iteration count is capped at 10 n matrix-vector products.
EigenEstimate max_eigenvalue(const DenseMatrix& c, double tol = 1e-12);

/// Smallest eigenvalue, computed as sigma - lambda_max(sigma I - C) with sigma
/// the Gershgorin row-sum bound.
EigenEstimate min_eigenvalue(const DenseMatrix& c, double tol = 1e-12);

}  // namespace wht
