#include "wht/diagonal_scaling.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace wht {

DiagonalScaling::DiagonalScaling(Vector weights, double safety, std::string label)
    : d_(std::move(weights)), safety_(safety), label_(std::move(label)) {
  if (!(safety_ >= 1.0) || !std::isfinite(safety_)) {
    throw std::invalid_argument("DiagonalScaling: safety must be >= 1");
  }
  sqrt_d_.resize(d_.size());
  for (std::size_t i = 0; i < d_.size(); ++i) {
    d_[i] *= safety_;
    if (!(d_[i] > 0.0) || !std::isfinite(d_[i])) {
      throw std::invalid_argument("DiagonalScaling: weight " + std::to_string(i) +
                                  " is not strictly positive");
    }
    sqrt_d_[i] = std::sqrt(d_[i]);
  }
}

DiagonalScaling DiagonalScaling::uniform(std::size_t n, double value, double safety,
                                         std::string label) {
  return DiagonalScaling(Vector(n, value), safety, std::move(label));
}

DiagonalScaling DiagonalScaling::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("DiagonalScaling::scaled: factor must be > 0");
  DiagonalScaling out;
  out.d_ = d_;
  out.sqrt_d_ = sqrt_d_;
  const double sf = std::sqrt(factor);
  for (std::size_t i = 0; i < d_.size(); ++i) {
    out.d_[i] *= factor;
    out.sqrt_d_[i] *= sf;
  }
  out.safety_ = safety_;
  out.label_ = label_;
  return out;
}

}  // namespace wht
