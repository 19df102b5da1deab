#include "wht/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wht {

namespace {

std::size_t count_nonzeros(std::span<const double> v) {
  return static_cast<std::size_t>(std::count_if(v.begin(), v.end(), [](double t) { return t != 0.0; }));
}

void check_budget(std::size_t s, std::size_t n, const char* op) {
  if (s < 1 || s > n) {
    throw std::invalid_argument(std::string(op) + ": s=" + std::to_string(s) +
                                " outside [1, " + std::to_string(n) + "]");
  }
}

}  // namespace

SparseIterate::SparseIterate(Vector x_, std::size_t s_) : x(std::move(x_)), s(s_) {
  if (count_nonzeros(x) > s) {
    throw std::invalid_argument("SparseIterate: more than s nonzeros");
  }
}

std::size_t SparseIterate::nnz() const { return count_nonzeros(x); }

std::vector<std::size_t> top_s_indices(std::span<const double> score, std::size_t s) {
  const std::size_t n = score.size();
  s = std::min(s, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  // Strict total order: larger score first, then lower index.
  auto before = [&](std::size_t a, std::size_t b) {
    return score[a] > score[b] || (score[a] == score[b] && a < b);
  };
  if (s < n) std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(s), idx.end(), before);
  idx.resize(s);
  std::sort(idx.begin(), idx.end());
  return idx;
}

SparseIterate project_sparse(std::span<const double> v, std::size_t s) {
  check_budget(s, v.size(), "project_sparse");
  Vector mag(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) mag[i] = std::abs(v[i]);
  Vector y(v.size(), 0.0);
  for (std::size_t i : top_s_indices(mag, s)) y[i] = v[i];
  return {std::move(y), s};
}

double m_s(std::span<const double> v, std::size_t s) {
  check_budget(s, v.size(), "m_s");
  Vector mag;
  mag.reserve(v.size());
  for (double t : v) {
    if (t != 0.0) mag.push_back(std::abs(t));
  }
  if (mag.size() < s) return 0.0;
  std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(s - 1), mag.end(),
                   std::greater<>());
  return mag[s - 1];
}

StationarityReport check_d_stationary(const ObjectiveModel& model, const SparseIterate& x,
                                      const DiagonalScaling& d, double tol) {
  const std::size_t n = model.dimension();
  if (d.size() != n) throw DimensionError("check_d_stationary: len(d) != n");
  const Vector g = model.gradient(x.x);
  const Vector& sd = d.sqrt_weights();
  Vector scaled(n);
  for (std::size_t i = 0; i < n; ++i) scaled[i] = sd[i] * x.x[i];
  const double ms = m_s(scaled, x.s);

  StationarityReport rep;
  for (std::size_t i = 0; i < n; ++i) {
    const double viol = x.x[i] != 0.0 ? std::abs(g[i]) : std::max(0.0, std::abs(g[i]) - sd[i] * ms);
    if (viol > rep.max_violation) {
      rep.max_violation = viol;
      rep.violating_index = i;
    }
  }
  rep.is_stationary = rep.max_violation <= tol;
  return rep;
}

// ---- kernels ---------------------------------------------------------------

double SeparableKernel::inverse_derivative(std::size_t i, double y, double t0) const {
  auto r = [&](double t) { return derivative(i, t) - y; };
  double r0 = r(t0);
  if (r0 == 0.0) return t0;

  // Bracket the root of the increasing function r.
  double lo = t0, hi = t0;
  double step = std::max(1.0, std::abs(t0));
  int expansions = 0;
  if (r0 < 0.0) {
    do {
      lo = hi;
      hi = t0 + step;
      step *= 2.0;
      if (++expansions > 2000) throw std::runtime_error("inverse_derivative: no bracket");
    } while (r(hi) < 0.0);
  } else {
    do {
      hi = lo;
      lo = t0 - step;
      step *= 2.0;
      if (++expansions > 2000) throw std::runtime_error("inverse_derivative: no bracket");
    } while (r(lo) > 0.0);
  }

  double t = std::clamp(t0, lo, hi);
  for (int it = 0; it < 100; ++it) {
    const double rt = r(t);
    if (rt == 0.0) return t;
    if (rt < 0.0) lo = t; else hi = t;
    const double h2 = second_derivative(i, t);
    double next = h2 > 0.0 ? t - rt / h2 : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t)) ||
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
      return next;
    }
    t = next;
  }
  throw std::runtime_error("inverse_derivative: no convergence in 100 iterations (coord " +
                           std::to_string(i) + ")");
}

double SeparableKernel::conjugate(std::size_t i, double y) const {
  const double t = inverse_derivative(i, y, 0.0);
  return y * t - value(i, t);
}

double SeparableKernel::argmin_linearplus(std::size_t i, double a, double lipschitz, double xi) const {
  return inverse_derivative(i, derivative(i, xi) - a / lipschitz, xi);
}

double SeparableKernel::bregman_distance(std::size_t i, double t, double xi) const {
  return value(i, t) - value(i, xi) - derivative(i, xi) * (t - xi);
}

double SeparableKernel::descent(std::size_t i, double a, double lipschitz, double xi, double u) const {
  auto phi = [&](double t) { return a * (t - xi) + lipschitz * bregman_distance(i, t, xi); };
  return phi(0.0) - phi(u);
}

QuadraticKernel::QuadraticKernel(Vector d) : d_(std::move(d)) {
  for (double v : d_) {
    if (!(v > 0.0)) throw std::invalid_argument("QuadraticKernel: weights must be positive");
  }
}

double QuadraticKernel::argmin_linearplus(std::size_t i, double a, double lipschitz, double xi) const {
  return xi - a / (lipschitz * d_[i]);
}

double QuadraticKernel::descent(std::size_t i, double, double lipschitz, double, double u) const {
  // phi(t) = phi(u) + L d (t - u)^2 / 2
  return 0.5 * lipschitz * d_[i] * u * u;
}

QuarticKernel::QuarticKernel(Vector d, double quartic) : d_(std::move(d)), c_(quartic) {
  for (double v : d_) {
    if (!(v > 0.0)) throw std::invalid_argument("QuarticKernel: weights must be positive");
  }
  if (!(c_ >= 0.0)) throw std::invalid_argument("QuarticKernel: quartic coefficient must be >= 0");
}

double QuarticKernel::value(std::size_t i, double t) const {
  const double t2 = t * t;
  return 0.5 * d_[i] * t2 + 0.25 * c_ * t2 * t2;
}

double QuarticKernel::derivative(std::size_t i, double t) const { return d_[i] * t + c_ * t * t * t; }

double QuarticKernel::second_derivative(std::size_t i, double t) const {
  return d_[i] + 3.0 * c_ * t * t;
}

// ---- Bregman step ----------------------------------------------------------

SparseIterate separable_bregman_argmin(std::span<const double> gradient, const SparseIterate& x,
                                       const SeparableKernel& h, double lipschitz) {
  const std::size_t n = x.x.size();
  if (gradient.size() != n || h.size() != n) {
    throw DimensionError("separable_bregman_argmin: size mismatch");
  }
  if (!(lipschitz > 0.0)) throw std::invalid_argument("separable_bregman_argmin: L must be > 0");
  check_budget(x.s, n, "separable_bregman_argmin");

  Vector u(n), gain(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = h.argmin_linearplus(i, gradient[i], lipschitz, x.x[i]);
    gain[i] = h.descent(i, gradient[i], lipschitz, x.x[i], u[i]);
  }
  Vector y(n, 0.0);
  for (std::size_t i : top_s_indices(gain, x.s)) y[i] = u[i];
  return {std::move(y), x.s};
}

SparseIterate separable_bregman_argmin(const ObjectiveModel& model, const SparseIterate& x,
                                       const SeparableKernel& h, double lipschitz) {
  return separable_bregman_argmin(model.gradient(x.x), x, h, lipschitz);
}

StationarityReport check_bregman_stationary(const ObjectiveModel& model, const SparseIterate& x,
                                            const SeparableKernel& h, double lipschitz,
                                            double tol) {
  const std::size_t n = model.dimension();
  if (h.size() != n) throw DimensionError("check_bregman_stationary: kernel size != n");
  const Vector g = model.gradient(x.x);

  StationarityReport rep;
  double off_max = 0.0;
  std::optional<std::size_t> off_arg;
  double on_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    if (x.x[i] != 0.0) {
      if (std::abs(g[i]) > rep.max_violation) {
        rep.max_violation = std::abs(g[i]);
        rep.violating_index = i;
      }
      on_min = std::min(on_min, h.conjugate(i, h.derivative(i, x.x[i])));
    } else {
      const double v = h.conjugate(i, h.derivative(i, 0.0) - g[i] / lipschitz);
      if (v > off_max) {
        off_max = v;
        off_arg = i;
      }
    }
  }
  if (x.nnz() < x.s) on_min = 0.0;
  const double gap = off_max - on_min;
  if (gap > rep.max_violation) {
    rep.max_violation = gap;
    rep.violating_index = off_arg;
  }
  rep.is_stationary = rep.max_violation <= tol;
  return rep;
}

// ---- coordinatewise minimality ---------------------------------------------

namespace {

// Minimum of a unimodal 1D function: downhill bracketing, then golden section
// to a 1e-10 interval.
double line_minimum(const std::function<double(double)>& phi) {
  double a = 0.0, fa = phi(a);
  double h = 1.0;
  double b = h, fb = phi(b);
  if (fb > fa) {
    const double bm = -h, fbm = phi(bm);
    if (fbm >= fa) {
      // [-h, h] brackets a minimum near 0.
      double lo = -h, hi = h;
      const double r = 0.5 * (3.0 - std::sqrt(5.0));
      double c = lo + r * (hi - lo), d = hi - r * (hi - lo);
      double fc = phi(c), fd = phi(d);
      while (hi - lo > 1e-10 * std::max(1.0, std::abs(c))) {
        if (fc < fd) { hi = d; d = c; fd = fc; c = lo + r * (hi - lo); fc = phi(c); }
        else { lo = c; c = d; fc = fd; d = hi - r * (hi - lo); fd = phi(d); }
      }
      return std::min({fa, fc, fd});
    }
    h = -h;
    b = bm;
    fb = fbm;
  }
  // Expand in the downhill direction until the value rises.
  double c = b + h, fc = phi(c);
  for (int it = 0; it < 200 && fc < fb; ++it) {
    a = b; fa = fb;
    b = c; fb = fc;
    h *= 2.0;
    c = b + h;
    fc = phi(c);
  }
  double lo = std::min(a, c), hi = std::max(a, c);
  const double r = 0.5 * (3.0 - std::sqrt(5.0));
  double p = lo + r * (hi - lo), q = hi - r * (hi - lo);
  double fp = phi(p), fq = phi(q);
  while (hi - lo > 1e-10 * std::max(1.0, std::abs(p))) {
    if (fp < fq) { hi = q; q = p; fq = fp; p = lo + r * (hi - lo); fp = phi(p); }
    else { lo = p; p = q; fp = fq; q = hi - r * (hi - lo); fq = phi(q); }
  }
  return std::min({fb, fp, fq});
}

}  // namespace

StationarityReport check_cw_minimum(const ObjectiveModel& model, const SparseIterate& x,
                                    double tol) {
  const std::size_t n = model.dimension();
  if (x.x.size() != n) throw DimensionError("check_cw_minimum: len(x) != n");
  const double f = model.value(x.x);
  const Vector g = model.gradient(x.x);
  const bool full = x.nnz() == x.s;

  StationarityReport rep;
  auto note = [&](double decrease, std::size_t i, std::optional<std::size_t> j) {
    if (decrease > rep.max_violation) {
      rep.max_violation = decrease;
      rep.violating_index = i;
      rep.swap_index = j;
    }
  };

  if (model.is_quadratic()) {
    const DenseMatrix hm = model.hessian_bound();
    // min_t f(y + t e_j) = f(y) - (grad_j f(y))^2 / (2 H_jj)
    auto best_decrease = [&](double fy, std::span<const double> gy, std::size_t j) {
      const double hjj = hm(j, j);
      if (hjj > 0.0) return f - (fy - gy[j] * gy[j] / (2.0 * hjj));
      return gy[j] != 0.0 ? std::numeric_limits<double>::infinity() : f - fy;
    };
    if (!full) {
      for (std::size_t j = 0; j < n; ++j) note(best_decrease(f, g, j), j, std::nullopt);
    } else {
      Vector gy(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = x.x[i];
        if (xi == 0.0) continue;
        const double fy = f - xi * g[i] + 0.5 * xi * xi * hm(i, i);
        const auto hi = hm.col(i);
        for (std::size_t k = 0; k < n; ++k) gy[k] = g[k] - xi * hi[k];
        for (std::size_t j = 0; j < n; ++j) note(best_decrease(fy, gy, j), i, j);
      }
    }
  } else {
    Vector y = x.x;
    auto scan = [&](std::size_t i, std::optional<std::size_t> removed) {
      for (std::size_t j = 0; j < n; ++j) {
        const double base = y[j];
        const double fmin = line_minimum([&](double t) {
          y[j] = base + t;
          const double v = model.value(y);
          y[j] = base;
          return v;
        });
        if (removed) note(f - fmin, i, j); else note(f - fmin, j, std::nullopt);
      }
    };
    if (!full) {
      scan(0, std::nullopt);
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        if (x.x[i] == 0.0) continue;
        y[i] = 0.0;
        scan(i, i);
        y[i] = x.x[i];
      }
    }
  }
  rep.is_stationary = rep.max_violation <= tol;
  return rep;
}

}  // namespace wht
