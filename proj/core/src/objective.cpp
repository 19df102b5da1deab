#include "wht/objective.hpp"

#include <cmath>
#include <string>

namespace wht {

void ObjectiveModel::check_dimension(std::span<const double> x, const char* op) const {
  if (x.size() != dimension()) {
    throw DimensionError(std::string(op) + ": len(x)=" + std::to_string(x.size()) +
                         " but n=" + std::to_string(dimension()));
  }
}

LeastSquares::LeastSquares(DenseMatrix a, Vector b) : a_(std::move(a)), b_(std::move(b)) {
  if (a_.rows() != b_.size()) throw DimensionError("LeastSquares: rows(A) != len(b)");
}

Vector LeastSquares::residual(std::span<const double> x) const {
  Vector r = matvec(a_, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b_[i];
  return r;
}

double LeastSquares::value(std::span<const double> x) const {
  check_dimension(x, "LeastSquares::value");
  const Vector r = residual(x);
  return 0.5 * dot(r, r);
}

Vector LeastSquares::gradient(std::span<const double> x) const {
  check_dimension(x, "LeastSquares::gradient");
  return matvec_transpose(a_, residual(x));
}

DenseMatrix LeastSquares::hessian_bound() const { return gram(a_); }

DenseMatrix LeastSquares::restricted_hessian(std::span<const double> x, const IndexSet& s) const {
  check_dimension(x, "LeastSquares::restricted_hessian");
  const std::size_t p = s.size();
  DenseMatrix h(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    for (std::size_t i = 0; i <= j; ++i) {
      const double v = dot(a_.col(s[i]), a_.col(s[j]));
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

std::optional<double> LeastSquares::residual_norm(std::span<const double> x) const {
  check_dimension(x, "LeastSquares::residual_norm");
  return norm2(residual(x));
}

Logistic::Logistic(DenseMatrix a, Vector labels) : a_(std::move(a)), labels_(std::move(labels)) {
  if (a_.rows() != labels_.size()) throw DimensionError("Logistic: rows(A) != len(labels)");
  for (double y : labels_) {
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("Logistic: labels must be 0 or 1");
  }
}

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Logistic::value(std::span<const double> x) const {
  check_dimension(x, "Logistic::value");
  const Vector z = matvec(a_, x);
  double f = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) f += softplus(z[i]) - labels_[i] * z[i];
  return f;
}

Vector Logistic::gradient(std::span<const double> x) const {
  check_dimension(x, "Logistic::gradient");
  Vector z = matvec(a_, x);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = sigmoid(z[i]) - labels_[i];
  return matvec_transpose(a_, z);
}

DenseMatrix Logistic::hessian_bound() const {
  DenseMatrix c = gram(a_);
  for (double& v : c.data()) v *= 0.25;
  return c;
}

DenseMatrix Logistic::restricted_hessian(std::span<const double> x, const IndexSet& s) const {
  check_dimension(x, "Logistic::restricted_hessian");
  const Vector z = matvec(a_, x);
  Vector weight(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double p = sigmoid(z[i]);
    weight[i] = p * (1.0 - p);
  }
  const std::size_t p = s.size();
  DenseMatrix h(p, p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto cj = a_.col(s[j]);
    for (std::size_t i = 0; i <= j; ++i) {
      const auto ci = a_.col(s[i]);
      double v = 0.0;
      for (std::size_t r = 0; r < weight.size(); ++r) v += ci[r] * weight[r] * cj[r];
      h(i, j) = v;
      h(j, i) = v;
    }
  }
  return h;
}

}  // namespace wht
