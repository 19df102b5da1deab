#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "wht/diagonal_scaling.hpp"
#include "wht/linalg.hpp"
#include "wht/objective.hpp"

namespace wht {

// A point of C_s = {x : ||x||_0 <= s}.
struct SparseIterate {
  Vector x;
  std::size_t s = 0;

  SparseIterate() = default;
  /// Throws std::invalid_argument if x has more than s nonzeros.
  SparseIterate(Vector x_, std::size_t s_);

  static SparseIterate zeros(std::size_t n, std::size_t s) { return {Vector(n, 0.0), s}; }

  IndexSet support() const { return IndexSet::support_of(x); }
  std::size_t nnz() const;
};

/// Positions of the s largest scores, ties broken toward the lower index.
/// Returned sorted ascending.
std::vector<std::size_t> top_s_indices(std::span<const double> score, std::size_t s);

/// Hard thresholding: keeps the s largest-magnitude entries of v (lowest index
/// wins ties) and zeroes the rest.
SparseIterate project_sparse(std::span<const double> v, std::size_t s);

/// s-th largest |v_i|; 0 when v has fewer than s nonzeros.
double m_s(std::span<const double> v, std::size_t s);

struct StationarityReport {
  bool is_stationary = true;
  double max_violation = 0.0;
  std::optional<std::size_t> violating_index;
  /// Second coordinate of the offending (i, j) swap for CW checks.
  std::optional<std::size_t> swap_index;
};

/// Gradient characterization of D-stationarity: grad_i f = 0 on the support
/// and |grad_i f| <= sqrt(D_ii) M_s(D^{1/2} x) off it.
StationarityReport check_d_stationary(const ObjectiveModel& model, const SparseIterate& x,
                                      const DiagonalScaling& d, double tol = 1e-8);

// Separable kernel h(x) = sum_i h_i(x_i) with h_i(0) = 0, each h_i strictly
// convex and supercoercive. Subclasses provide value and the first two
// derivatives; the conjugate and the per-coordinate Bregman step default to a
// safeguarded Newton solve of h_i'(t) = y.
class SeparableKernel {
 public:
  virtual ~SeparableKernel() = default;

  virtual std::size_t size() const = 0;
  virtual double value(std::size_t i, double t) const = 0;
  virtual double derivative(std::size_t i, double t) const = 0;
  virtual double second_derivative(std::size_t i, double t) const = 0;

  /// h_i^*(y) = sup_t y t - h_i(t).
  virtual double conjugate(std::size_t i, double y) const;

  /// argmin_t a (t - x_i) + L D_{h_i}(t, x_i).
  virtual double argmin_linearplus(std::size_t i, double a, double lipschitz, double xi) const;

  /// phi_i(0) - phi_i(u) for phi_i(t) = a (t - x_i) + L D_{h_i}(t, x_i).
  virtual double descent(std::size_t i, double a, double lipschitz, double xi, double u) const;

  /// Solves h_i'(t) = y. Throws std::runtime_error after 100 iterations
  /// without convergence.
  double inverse_derivative(std::size_t i, double y, double t0) const;

  double bregman_distance(std::size_t i, double t, double xi) const;
};

/// h_i(t) = d_i t^2 / 2, i.e. h(x) = x^T D x / 2.
class QuadraticKernel final : public SeparableKernel {
 public:
  explicit QuadraticKernel(Vector d);
  explicit QuadraticKernel(const DiagonalScaling& d) : QuadraticKernel(d.weights()) {}

  std::size_t size() const override { return d_.size(); }
  double value(std::size_t i, double t) const override { return 0.5 * d_[i] * t * t; }
  double derivative(std::size_t i, double t) const override { return d_[i] * t; }
  double second_derivative(std::size_t i, double) const override { return d_[i]; }
  double conjugate(std::size_t i, double y) const override { return 0.5 * y * y / d_[i]; }
  double argmin_linearplus(std::size_t i, double a, double lipschitz, double xi) const override;
  double descent(std::size_t i, double a, double lipschitz, double xi, double u) const override;

 private:
  Vector d_;
};

/// h_i(t) = d_i t^2 / 2 + c t^4 / 4.
class QuarticKernel final : public SeparableKernel {
 public:
  QuarticKernel(Vector d, double quartic);

  std::size_t size() const override { return d_.size(); }
  double value(std::size_t i, double t) const override;
  double derivative(std::size_t i, double t) const override;
  double second_derivative(std::size_t i, double t) const override;

 private:
  Vector d_;
  double c_;
};

/// argmin over C_s of grad^T (y - x) + L D_h(y, x): per-coordinate minimizers
/// u_i, then keep the s coordinates with the largest descent
/// phi_i(0) - phi_i(u_i) (lowest index wins ties).
SparseIterate separable_bregman_argmin(const ObjectiveModel& model, const SparseIterate& x,
                                       const SeparableKernel& h, double lipschitz);
SparseIterate separable_bregman_argmin(std::span<const double> gradient, const SparseIterate& x,
                                       const SeparableKernel& h, double lipschitz);

/// Conjugate characterization of L-Bregman stationarity. The violation is the
/// larger of max |grad_i f| on the support and the conjugate gap
/// max_{j off} h_j^*(h_j'(0) - grad_j f / L) - min_{i on} h_i^*(h_i'(x_i))
/// (the min term is 0 when ||x||_0 < s).
StationarityReport check_bregman_stationary(const ObjectiveModel& model, const SparseIterate& x,
                                            const SeparableKernel& h, double lipschitz,
                                            double tol = 1e-8);

/// Coordinatewise minimality. With ||x||_0 < s: no single-coordinate line
/// minimization decreases f. With ||x||_0 = s: no move x - x_i e_i + t e_j
/// (i on the support, any j) decreases f. The violation is the largest
/// achievable decrease; the report names (i, j).
StationarityReport check_cw_minimum(const ObjectiveModel& model, const SparseIterate& x,
                                    double tol = 1e-8);

}  // namespace wht
