#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "wht/linalg.hpp"

namespace wht {

enum class DsmModel { linear, quadratic, lipschitz };

const char* to_string(DsmModel m);
/// Parses "linear" | "quadratic" | "lipschitz"; throws std::invalid_argument.
DsmModel parse_dsm_model(const std::string& name);

// Low-rank factor of Z = B B^T, B is n x k.
struct BmFactor {
  DenseMatrix b;
  std::size_t sweeps = 0;
  // Dual objective after each sweep (entry 0 is the initial value).
  std::vector<double> dual_history;

  std::size_t rank() const { return b.cols(); }
};

struct BcmOptions {
  std::size_t rank = 0;  // 0: ceil(sqrt(2n)) + 1
  std::size_t sweeps = 300;
  std::uint64_t seed = 0;
  bool parallel = false;
  unsigned workers = 1;  // parallel sweep only
  // Early exit when |obj_t - obj_{t-window}| <= rel_tol * max(1, |obj_t|).
  double rel_tol = 1e-10;
  std::size_t window = 5;
  // Called after every sweep with the current factor; leave empty to skip.
  std::function<void(std::size_t sweep, const DenseMatrix& b)> on_sweep;
};

struct DsmSolution {
  DsmModel model = DsmModel::lipschitz;
  Vector w;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  double gap = 0.0;                 // (primal - dual) / max(1, |dual|)
  double feasibility_margin = 0.0;  // lambda_min(Diag(w) - C)
  std::size_t iterations = 0;
  bool eigen_converged = true;
  std::vector<double> dual_history;
};

std::size_t default_rank(std::size_t n);

/// Seeded Gaussian n x k factor with unit-norm rows.
DenseMatrix initial_factor(std::size_t n, std::size_t k, std::uint64_t seed);

/// Dual objectives: <C, B B^T> and <C, B B^T> - 1/2 sum_i ||B_i||^4.
double dual_objective_linear(const DenseMatrix& c, const DenseMatrix& b);
double dual_objective_quadratic(const DenseMatrix& c, const DenseMatrix& b);

/// w = lambda_max(C) 1, dual value v^T C v for the unit top eigenvector.
DsmSolution compute_lipschitz(const DenseMatrix& c, double tol = 1e-12);

/// Positive root of t^3 - c t - g = 0 for g > 0. For g = 0 returns
/// sqrt(max(c, 0)). Throws std::invalid_argument for g < 0 or nonfinite input.
double cubic_positive_root(double c, double g);

/// One sequential sweep over the rows for the unit-diagonal model. Returns the
/// dual objective after the sweep.
double bcm_linear_sweep(const DenseMatrix& c, DenseMatrix& b);
/// One sequential sweep for the quadratic-cost model.
double bcm_quadratic_sweep(const DenseMatrix& c, DenseMatrix& b);

/// Row-parallel sweep: every row is updated from the same pre-sweep B using
/// G = C B (diagonal term included). Linear: B_j = G_j / ||G_j||. Quadratic:
/// B_j = ||G_j||^{1/3} G_j / ||G_j||. For PSD C both are ascent steps of a
/// minorizer, so the dual objective does not decrease.
void bcm_parallel_sweep(const DenseMatrix& c, DenseMatrix& b, DsmModel model,
                        unsigned workers = 1);

BmFactor bcm_linear(const DenseMatrix& c, std::size_t k, std::size_t sweeps, std::uint64_t seed);
BmFactor bcm_quadratic(const DenseMatrix& c, std::size_t k, std::size_t sweeps,
                       std::uint64_t seed);
/// Either model, sequential or parallel, with early exit.
BmFactor run_bcm(const DenseMatrix& c, DsmModel model, const BcmOptions& opt);

/// w_i = z_i^T (Z C)_i / z_i^T z_i with z_i the i-th column of Z = B B^T,
/// evaluated through B. Falls back to (ZC)_ii / Z_ii when z_i^T z_i < 1e-14.
Vector extract_primal_linear(const DenseMatrix& b, const DenseMatrix& c);

/// w_i = ||B_i||^2.
Vector extract_primal_quadratic(const DenseMatrix& b);

/// Returns w' with lambda_min(Diag(w') - C) >= 0. Candidates: the smallest
/// factor 1.01^j <= 2 making the scaled w feasible, and the additive shift
/// w + |lambda_min|(1 + 1e-6). The one with the lower model cost wins (the
/// shift when scaling cannot reach feasibility).
Vector repair_feasibility(const Vector& w, const DenseMatrix& c, DsmModel model = DsmModel::linear);

/// lambda_min(Diag(w) - C).
double feasibility_margin(const Vector& w, const DenseMatrix& c);

DsmSolution compute_dsm(const DenseMatrix& c, DsmModel model, const BcmOptions& opt = {});

}  // namespace wht
