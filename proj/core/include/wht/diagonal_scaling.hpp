#pragma once

#include <string>

#include "wht/linalg.hpp"

namespace wht {

// Positive weight vector d representing D = Diag(d). The stored weights already
// include the multiplicative safety margin applied at construction.
class DiagonalScaling {
 public:
  DiagonalScaling() = default;
  /// d = safety * weights. Throws std::invalid_argument on a nonpositive or
  /// nonfinite weight, or safety < 1.
  explicit DiagonalScaling(Vector weights, double safety = 1.0, std::string label = {});

  static DiagonalScaling uniform(std::size_t n, double value, double safety = 1.0,
                                 std::string label = "L");

  std::size_t size() const { return d_.size(); }
  const Vector& weights() const { return d_; }
  const Vector& sqrt_weights() const { return sqrt_d_; }
  double operator[](std::size_t i) const { return d_[i]; }
  double safety() const { return safety_; }
  const std::string& label() const { return label_; }

  /// factor * D, keeping the label.
  DiagonalScaling scaled(double factor) const;

 private:
  Vector d_;
  Vector sqrt_d_;
  double safety_ = 1.0;
  std::string label_;
};

}  // namespace wht
