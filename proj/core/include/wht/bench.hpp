#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wht/dsm.hpp"
#include "wht/linalg.hpp"
#include "wht/objective.hpp"
#include "wht/solvers.hpp"
#include "wht/sparsity.hpp"

namespace wht {

// Noiseless compressed-sensing instance: Gaussian A with unit-norm columns,
// Gaussian s-sparse x_star on a uniform support, b = A x_star.
struct CsInstance {
  DenseMatrix a;
  Vector b;
  SparseIterate x_star;
  std::size_t s = 0;
  std::uint64_t seed = 0;
};

CsInstance generate_cs_instance(std::size_t m, std::size_t n, std::size_t s, std::uint64_t seed);

struct RecoveryEval {
  double relative_error = 0.0;
  bool recovered = false;
};

inline constexpr double kRecoveryTol = 1e-4;

/// ||x - x_star|| / ||x_star||, recovered when below 1e-4. Throws
/// std::invalid_argument when x_star = 0.
RecoveryEval evaluate_recovery(std::span<const double> x, std::span<const double> x_star);

// ---- algorithm registry ----------------------------------------------------

enum class Driver { weighted, mfista };

struct AlgorithmSpec {
  std::string name;
  std::string description;
  Driver driver = Driver::weighted;
  std::vector<DsmModel> schedule;
  SolverConfig config;
  // Safety factor applied to every scheduled weight vector.
  double safety = 1.0;
};

/// Registered names, in display order.
std::vector<std::string> algorithm_names();
/// Throws std::invalid_argument for an unknown name.
AlgorithmSpec lookup_algorithm(const std::string& name);

// Weight vectors of each DSM model for one Hessian bound, computed once and
// shared across algorithms.
struct ScalingSet {
  std::map<DsmModel, DsmSolution> solutions;
  double seconds = 0.0;

  /// Scaling for `model` with the given safety factor. Weights are floored at
  /// 1e-12 * max weight so the scaling stays strictly positive.
  DiagonalScaling scaling(DsmModel model, double safety) const;
};

ScalingSet compute_scalings(const DenseMatrix& c, const std::vector<DsmModel>& models,
                            const BcmOptions& opt = {});

/// Models used by any of the named algorithms.
std::vector<DsmModel> models_needed(const std::vector<AlgorithmSpec>& algs);

RunTrace run_algorithm(const AlgorithmSpec& alg, const ObjectiveModel& model, std::size_t s,
                       const ScalingSet& scalings);

/// Records whose objective rises by more than rel_tol * |f_prev| over the
/// previous record, skipping records tagged restart.
std::size_t count_descent_violations(const RunTrace& trace, double rel_tol = 1e-12);

// ---- experiment grid -------------------------------------------------------

struct RecoveryRecord {
  std::string algorithm;
  std::size_t s = 0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  bool recovered = false;
  double relative_error = 0.0;
  std::size_t iterations = 0;
  std::size_t restarts = 0;
  std::size_t descent_violations = 0;
  double cpu_seconds = 0.0;
  double wall_seconds = 0.0;
  double dsm_seconds = 0.0;
  std::string termination;
};

struct ExperimentGrid {
  std::size_t m = 64;
  std::size_t n = 256;
  std::vector<std::size_t> levels;
  std::size_t trials = 50;
  std::vector<std::string> algorithms;
  std::uint64_t master_seed = 7;
  unsigned workers = 1;
  std::size_t max_iters = 15000;

  void validate() const;
  /// Canonical text form; its FNV-1a hash goes into the summary.
  std::string canonical() const;
};

struct GridResult {
  std::vector<RecoveryRecord> records;  // ordered by (level, trial, algorithm)
  // rate[algorithm][s] in percent
  std::map<std::string, std::map<std::size_t, double>> rate;
  std::uint64_t config_hash = 0;
};

/// Instance seed for (level, trial); independent of worker scheduling.
std::uint64_t instance_seed(std::uint64_t master, std::size_t s, std::size_t trial);

std::uint64_t fnv1a64(const std::string& text);

/// Runs every (level, trial) instance against every algorithm. When out_dir
/// is given writes recovery.csv, timing.csv and summary.json there. The
/// optional observer sees each trace; calls are serialized.
GridResult run_grid(const ExperimentGrid& grid, const std::optional<std::string>& out_dir = {},
                    const std::function<void(const RecoveryRecord&, const RunTrace&)>& observer = {});

void write_recovery_csv(const GridResult& result, const std::string& path);
void write_timing_csv(const GridResult& result, const std::string& path);
std::string summary_json(const ExperimentGrid& grid, const GridResult& result);

/// Trace CSV for external plotting.
void emit_trajectory(const RunTrace& trace, const std::string& path);

// ---- DSM cost benchmark ----------------------------------------------------

struct DsmBenchRow {
  std::size_t n = 0;
  std::string model;
  std::string variant;  // sequential | parallel
  std::size_t rank = 0;
  std::size_t sweeps = 0;
  double wall_seconds = 0.0;
  double cpu_seconds = 0.0;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  double gap = 0.0;
  // Per sweep: ||Z_t - Z_final||_F / ||Z_final||_F.
  std::vector<double> trajectory;
  std::string error;  // nonempty when the size could not be run
};

struct DsmBenchOptions {
  std::vector<std::size_t> sizes{250, 500, 1000};
  std::uint64_t seed = 11;
  std::size_t sweeps = 300;
  unsigned workers = 1;
};

/// For each size n: A is floor(n/8) x n Gaussian with unit columns, C = A^T A;
/// runs {sequential, parallel} x {linear, quadratic}.
std::vector<DsmBenchRow> dsm_benchmark(const DsmBenchOptions& opt);
void write_dsm_bench(const std::vector<DsmBenchRow>& rows, const std::string& out_dir);

/// Worker count from the WHT_WORKERS environment variable, else `fallback`.
unsigned workers_from_env(unsigned fallback = 1);

}  // namespace wht
