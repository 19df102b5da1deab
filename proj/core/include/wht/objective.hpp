#pragma once

#include <optional>
#include <span>

#include "wht/linalg.hpp"

namespace wht {

// Smooth objective f with a constant Hessian majorant C (C >= Hessian of f everywhere).
class ObjectiveModel {
 public:
  virtual ~ObjectiveModel() = default;

  virtual std::size_t dimension() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual Vector gradient(std::span<const double> x) const = 0;
  virtual DenseMatrix hessian_bound() const = 0;

  /// Exact Hessian at x restricted to rows/cols in s.
  virtual DenseMatrix restricted_hessian(std::span<const double> x, const IndexSet& s) const = 0;

  /// ||Ax - b|| for data-fitting objectives; nullopt when no residual exists.
  virtual std::optional<double> residual_norm(std::span<const double> /*x*/) const {
    return std::nullopt;
  }

  /// True when f is quadratic, so 1D minimizations have a closed form.
  virtual bool is_quadratic() const { return false; }

 protected:
  void check_dimension(std::span<const double> x, const char* op) const;
};

/// f(x) = 1/2 ||Ax - b||^2.
class LeastSquares final : public ObjectiveModel {
 public:
  LeastSquares(DenseMatrix a, Vector b);

  std::size_t dimension() const override { return a_.cols(); }
  double value(std::span<const double> x) const override;
  Vector gradient(std::span<const double> x) const override;
  DenseMatrix hessian_bound() const override;
  DenseMatrix restricted_hessian(std::span<const double> x, const IndexSet& s) const override;
  std::optional<double> residual_norm(std::span<const double> x) const override;
  bool is_quadratic() const override { return true; }

  const DenseMatrix& matrix() const { return a_; }
  const Vector& rhs() const { return b_; }

 private:
  Vector residual(std::span<const double> x) const;

  DenseMatrix a_;
  Vector b_;
};

/// Logistic log-loss f(x) = sum_i log(1 + exp(a_i^T x)) - y_i a_i^T x, labels y_i in {0, 1}.
class Logistic final : public ObjectiveModel {
 public:
  Logistic(DenseMatrix a, Vector labels);

  std::size_t dimension() const override { return a_.cols(); }
  double value(std::span<const double> x) const override;
  Vector gradient(std::span<const double> x) const override;
  /// 1/4 A^T A, the Hessian at the worst-case probabilities p = 1/2.
  DenseMatrix hessian_bound() const override;
  DenseMatrix restricted_hessian(std::span<const double> x, const IndexSet& s) const override;

 private:
  DenseMatrix a_;
  Vector labels_;
};

}  // namespace wht
