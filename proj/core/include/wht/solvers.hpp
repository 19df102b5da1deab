#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wht/diagonal_scaling.hpp"
#include "wht/linalg.hpp"
#include "wht/objective.hpp"
#include "wht/sparsity.hpp"

namespace wht {

struct SolverConfig {
  std::size_t max_iters = 15000;
  double residual_tol = 1e-10;
  // Stagnation stop: std of the last trace_window objective values below
  // trace_std_tol. Only consulted when use_newton is set.
  std::size_t trace_window = 5;
  double trace_std_tol = 1e-10;

  bool use_line_search = true;
  double ls_alpha = 0.5;
  std::size_t ls_trials = 8;  // J
  double ls_beta = 1e-4;

  bool use_restart = true;
  double restart_gamma = 1e-4;

  bool use_newton = false;
  double newton_beta = 1e-4;

  // Iterations each scheduled scaling is kept before moving to the next.
  std::size_t period = 1;

  // A step is a fixed point when ||x_{k+1} - x_k|| <= fixed_point_tol * max(1, ||x_k||).
  double fixed_point_tol = 1e-12;

  bool record_support = true;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a parameter is out of range.
  void validate() const;
};

enum class Event { gradient, newton_accepted, newton_rejected, restart, dsm_switch };
enum class Termination { residual, stagnation, fixed_point, max_iters };

const char* to_string(Event e);
const char* to_string(Termination t);

struct TraceRecord {
  std::size_t iter = 0;
  double f = 0.0;
  std::size_t support_size = 0;
  IndexSet support;  // empty unless SolverConfig::record_support
  double step_norm = 0.0;
  Event event = Event::gradient;
  std::optional<double> momentum_t;  // MFISTA only
};

struct RunTrace {
  double initial_f = 0.0;
  std::vector<TraceRecord> records;
  Vector x;
  Termination termination = Termination::max_iters;
  std::size_t iterations = 0;
  std::size_t restarts = 0;

  double final_f() const { return records.empty() ? initial_f : records.back().f; }
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& what, std::size_t iter)
      : std::runtime_error(what + " at iteration " + std::to_string(iter)), iter_(iter) {}
  std::size_t iteration() const { return iter_; }

 private:
  std::size_t iter_;
};

/// One thresholded step y = D^{-1/2} P_s(D^{1/2} x - D^{-1/2} g), with the
/// scaling multiplied by `factor`.
SparseIterate weighted_step(const SparseIterate& x, std::span<const double> gradient,
                            const DiagonalScaling& d, double factor = 1.0);

/// Backtracking over D_j = alpha^{J-j} D for j = 1..J (largest step first).
/// Returns the first trial with f(x_j) <= f(x) - beta ||x_j - x||^2, else x_J.
SparseIterate line_search_step(const ObjectiveModel& model, const SparseIterate& x,
                               const DiagonalScaling& d, double alpha, std::size_t trials,
                               double beta);
/// Same, with f(x) and grad f(x) already known.
SparseIterate line_search_step(const ObjectiveModel& model, const SparseIterate& x, double fx,
                               std::span<const double> gradient, const DiagonalScaling& d,
                               double alpha, std::size_t trials, double beta);

/// One thresholded step with gamma * D; not monotone.
SparseIterate restart_step(const ObjectiveModel& model, const SparseIterate& x,
                           const DiagonalScaling& d, double gamma);

/// Restricted Newton step on the support of x. Returns v when
/// f(v) <= f(x) - beta ||v - x||^2, else x (also when the restricted Hessian is
/// singular).
SparseIterate newton_step(const ObjectiveModel& model, const SparseIterate& x, double beta);

RunTrace iwht(const ObjectiveModel& model, const SparseIterate& x0, const DiagonalScaling& d,
              const SolverConfig& cfg);

/// Cycles through `schedule`, keeping each scaling for cfg.period iterations.
RunTrace ciwht(const ObjectiveModel& model, const SparseIterate& x0,
               const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg);

/// Bregman proximal gradient with a separable kernel.
RunTrace bpg(const ObjectiveModel& model, const SparseIterate& x0, const SeparableKernel& h,
             double lipschitz, const SolverConfig& cfg);

/// Line search + optional restricted Newton + gradient restart over a
/// schedule of scalings. The cfg flags select the variant; iwht and ciwht are
/// the case with all three switched off.
RunTrace gpnp(const ObjectiveModel& model, const SparseIterate& x0,
              const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg);

/// Monotone FISTA with momentum reset on support change.
RunTrace mfista(const ObjectiveModel& model, const SparseIterate& x0,
                const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg);

}  // namespace wht
