#include "wht/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wht/rng.hpp"

namespace wht {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
    : rows_(rows), cols_(cols), data_(std::move(column_major)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("DenseMatrix: data length " + std::to_string(data_.size()) +
                         " != rows*cols " + std::to_string(rows_ * cols_));
  }
}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(r, c);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("DenseMatrix::from_rows: ragged rows");
    std::size_t j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

bool DenseMatrix::all_finite() const { return wht::all_finite(data_); }

IndexSet::IndexSet(std::vector<std::size_t> indices) : idx_(std::move(indices)) {
  std::sort(idx_.begin(), idx_.end());
  idx_.erase(std::unique(idx_.begin(), idx_.end()), idx_.end());
}

IndexSet IndexSet::support_of(std::span<const double> x) {
  IndexSet s;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) s.idx_.push_back(i);
  }
  return s;
}

IndexSet IndexSet::range(std::size_t n) {
  IndexSet s;
  s.idx_.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.idx_[i] = i;
  return s;
}

bool IndexSet::contains(std::size_t i) const {
  return std::binary_search(idx_.begin(), idx_.end(), i);
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("distance: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

bool all_finite(std::span<const double> a) {
  return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

Vector matvec(const DenseMatrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("matvec: cols(A)=" + std::to_string(a.cols()) +
                         " but len(x)=" + std::to_string(x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto cj = a.col(j);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += cj[i] * xj;
  }
  return y;
}

Vector matvec_transpose(const DenseMatrix& a, std::span<const double> x) {
  if (a.rows() != x.size()) {
    throw DimensionError("matvec_transpose: rows(A)=" + std::to_string(a.rows()) +
                         " but len(x)=" + std::to_string(x.size()));
  }
  Vector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

Vector symv(const DenseMatrix& m, std::span<const double> x) { return matvec(m, x); }

DenseMatrix gram(const DenseMatrix& a) {
  const std::size_t n = a.cols();
  DenseMatrix c(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = dot(a.col(i), a.col(j));
      c(i, j) = v;
      c(j, i) = v;
    }
  }
  return c;
}

bool cholesky_succeeds(const DenseMatrix& m, double shift) {
  if (m.rows() != m.cols()) throw DimensionError("cholesky_succeeds: matrix not square");
  const std::size_t n = m.rows();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = j; i < n; ++i) l(i, j) = m(i, j);
    l(j, j) -= shift;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double diag = l(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) return false;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = l(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  return true;
}

std::optional<Vector> solve_spd_restricted(const DenseMatrix& m, const IndexSet& s,
                                           std::span<const double> r) {
  const std::size_t p = s.size();
  if (r.size() != p) throw DimensionError("solve_spd_restricted: len(r) != |S|");
  if (m.rows() != m.cols()) throw DimensionError("solve_spd_restricted: M not square");
  if (p == 0) return Vector{};
  if (s.indices().back() >= m.rows()) throw DimensionError("solve_spd_restricted: S out of range");

  DenseMatrix l(p, p);
  double max_diag = 0.0;
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = j; i < p; ++i) l(i, j) = m(s[i], s[j]);
    max_diag = std::max(max_diag, l(j, j));
  }
  if (!(max_diag > 0.0)) return std::nullopt;
  const double pivot_floor = 1e-12 * max_diag;

  for (std::size_t j = 0; j < p; ++j) {
    double diag = l(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > pivot_floor)) return std::nullopt;
    const double ljj = std::sqrt(diag);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < p; ++i) {
      double v = l(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }

  Vector v(r.begin(), r.end());
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t k = 0; k < i; ++k) v[i] -= l(i, k) * v[k];
    v[i] /= l(i, i);
  }
  for (std::size_t ii = p; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < p; ++k) v[ii] -= l(k, ii) * v[k];
    v[ii] /= l(ii, ii);
  }
  return v;
}

namespace {

// Implicit QL on a symmetric tridiagonal matrix (diag d, off-diagonal e with
// e[i] coupling i and i+1). Rotations are applied to every row of z, where z
// holds `rows` rows of length d.size(). Starting from the identity yields the
// eigenvectors as columns; starting from e_{k-1}^T yields only their last
// components. Returns false if some eigenvalue needs more than 60 sweeps.
bool tridiagonal_ql(std::vector<double>& d, std::vector<double> e, std::vector<double>& z,
                    std::size_t rows) {
  const std::size_t n = d.size();
  if (n == 0) return true;
  e.resize(n, 0.0);
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  auto zr = [&](std::size_t row, std::size_t col) -> double& { return z[row * n + col]; };

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) return false;
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        std::size_t i = m;
        while (i-- > l) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < rows; ++k) {
            f = zr(k, i + 1);
            zr(k, i + 1) = s * zr(k, i) + c * f;
            zr(k, i) = c * zr(k, i) - s * f;
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  return true;
}

struct RitzPair {
  double value;
  double last_component;
  std::size_t index;
};

RitzPair top_ritz(const std::vector<double>& alpha, const std::vector<double>& beta,
                  std::size_t begin, std::size_t end) {
  const std::size_t k = end - begin;
  std::vector<double> d(alpha.begin() + begin, alpha.begin() + end);
  std::vector<double> e(beta.begin() + begin, beta.begin() + end - 1);
  std::vector<double> z(k, 0.0);
  z[k - 1] = 1.0;
  tridiagonal_ql(d, e, z, 1);
  const auto it = std::max_element(d.begin(), d.end());
  const std::size_t idx = static_cast<std::size_t>(it - d.begin());
  return {*it, z[idx], idx};
}

Vector ritz_vector(const std::vector<double>& alpha, const std::vector<double>& beta,
                   const std::vector<Vector>& basis, std::size_t begin, std::size_t end) {
  const std::size_t k = end - begin;
  std::vector<double> d(alpha.begin() + begin, alpha.begin() + end);
  std::vector<double> e(beta.begin() + begin, beta.begin() + end - 1);
  std::vector<double> z(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) z[i * k + i] = 1.0;
  tridiagonal_ql(d, e, z, k);
  const std::size_t idx =
      static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
  const std::size_t n = basis.front().size();
  Vector v(n, 0.0);
  for (std::size_t j = 0; j < k; ++j) {
    const double coef = z[j * k + idx];
    const Vector& q = basis[begin + j];
    for (std::size_t i = 0; i < n; ++i) v[i] += coef * q[i];
  }
  const double nv = norm2(v);
  if (nv > 0.0) {
    for (double& x : v) x /= nv;
  }
  return v;
}

double gershgorin_bound(const DenseMatrix& c) {
  double bound = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < c.cols(); ++j) row += std::abs(c(i, j));
    bound = std::max(bound, row);
  }
  return bound;
}

void orthogonalize(Vector& w, const std::vector<Vector>& basis) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const Vector& q : basis) {
      const double coef = dot(q, w);
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= coef * q[i];
    }
  }
}

}  // namespace

EigenEstimate max_eigenvalue(const DenseMatrix& c, double tol) {
  if (c.rows() != c.cols()) throw DimensionError("max_eigenvalue: matrix not square");
  const std::size_t n = c.rows();
  if (n == 0) throw DimensionError("max_eigenvalue: empty matrix");
  if (n == 1) return {c(0, 0), Vector{1.0}, true, 1};

  const double anorm = std::max(gershgorin_bound(c), std::numeric_limits<double>::min());
  const std::size_t max_products = 10 * n;
  Philox4x32 rng(0x5EEDu, 0);

  std::vector<Vector> basis;
  std::vector<double> alpha;
  std::vector<double> beta;
  basis.emplace_back(n, 1.0 / std::sqrt(static_cast<double>(n)));

  // Blocks before `block_begin` are exact invariant subspaces.
  std::size_t block_begin = 0;
  bool have_closed = false;
  double closed_value = 0.0;
  Vector closed_vector;

  EigenEstimate out;
  for (std::size_t j = 0;; ++j) {
    Vector w = symv(c, basis[j]);
    ++out.iterations;
    const double a = dot(basis[j], w);
    for (std::size_t i = 0; i < n; ++i) w[i] -= a * basis[j][i];
    if (j > block_begin) {
      for (std::size_t i = 0; i < n; ++i) w[i] -= beta[j - 1] * basis[j - 1][i];
    }
    orthogonalize(w, basis);
    const double b = norm2(w);
    alpha.push_back(a);

    const std::size_t k = j + 1;
    const RitzPair top = top_ritz(alpha, beta, block_begin, k);
    const double scale = top.value != 0.0 ? std::abs(top.value) : anorm;
    const bool exhausted = k == n;
    const bool breakdown = b <= 1e-13 * anorm;
    const bool block_converged = b * std::abs(top.last_component) <= tol * scale;

    if (breakdown || exhausted || block_converged || out.iterations >= max_products) {
      const double block_value = top.value;
      if (!have_closed || block_value > closed_value) {
        closed_value = block_value;
        closed_vector = ritz_vector(alpha, beta, basis, block_begin, k);
      }
      have_closed = true;
      if (exhausted || (block_converged && !breakdown)) {
        out.converged = true;
        break;
      }
      if (out.iterations >= max_products) break;
      // Invariant subspace found: continue from a random direction orthogonal
      // to everything seen so far.
      Vector r(n);
      for (double& x : r) x = rng.normal();
      orthogonalize(r, basis);
      const double nr = norm2(r);
      if (nr <= 1e-10) {
        out.converged = true;
        break;
      }
      for (double& x : r) x /= nr;
      beta.push_back(0.0);
      basis.push_back(std::move(r));
      block_begin = k;
      continue;
    }
    beta.push_back(b);
    for (double& x : w) x /= b;
    basis.push_back(std::move(w));
  }
  out.value = closed_value;
  out.vector = std::move(closed_vector);
  return out;
}

EigenEstimate min_eigenvalue(const DenseMatrix& c, double tol) {
  if (c.rows() != c.cols()) throw DimensionError("min_eigenvalue: matrix not square");
  const std::size_t n = c.rows();
  const double sigma = gershgorin_bound(c);
  DenseMatrix shifted(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) shifted(i, j) = (i == j ? sigma : 0.0) - c(i, j);
  }
  EigenEstimate e = max_eigenvalue(shifted, tol);
  e.value = sigma - e.value;
  return e;
}

}  // namespace wht
