#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "support/oracles.hpp"
#include "wht/bench.hpp"

namespace wht {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("wht_bench_" + name);
  fs::remove_all(d);
  return d;
}

TEST(CsInstance, DeterministicWithUnitColumns) {
  const auto a = generate_cs_instance(20, 50, 4, 123);
  const auto b = generate_cs_instance(20, 50, 4, 123);
  const auto c = generate_cs_instance(20, 50, 4, 124);
  EXPECT_EQ(a.b, b.b);
  EXPECT_EQ(a.x_star.x, b.x_star.x);
  EXPECT_NE(a.b, c.b);
  EXPECT_EQ(a.x_star.nnz(), 4u);
  for (std::size_t j = 0; j < 50; ++j) EXPECT_NEAR(norm2(a.a.col(j)), 1.0, 1e-14);
  EXPECT_EQ(a.b, matvec(a.a, a.x_star.x));
}

TEST(Recovery, Examples) {
  const Vector xs{0, 2, 0, -1};
  EXPECT_TRUE(evaluate_recovery(xs, xs).recovered);
  EXPECT_EQ(evaluate_recovery(xs, xs).relative_error, 0.0);
  const auto zero = evaluate_recovery(Vector(4, 0.0), xs);
  EXPECT_DOUBLE_EQ(zero.relative_error, 1.0);
  EXPECT_FALSE(zero.recovered);
  Vector close = xs;
  for (double& v : close) v *= 1 + 5e-5;
  const auto near = evaluate_recovery(close, xs);
  EXPECT_NEAR(near.relative_error, 5e-5, 1e-12);
  EXPECT_TRUE(near.recovered);
  EXPECT_THROW(evaluate_recovery(xs, Vector(4, 0.0)), std::invalid_argument);
}

TEST(Registry, NamesResolveAndUnknownThrows) {
  const auto names = algorithm_names();
  for (const char* want : {"gpnp-l", "gpnp-dql", "iht-lsr", "ciwht-lsr", "iwht", "mfista"})
    EXPECT_NE(std::find(names.begin(), names.end(), want), names.end()) << want;
  for (const auto& n : names) EXPECT_EQ(lookup_algorithm(n).name, n);
  EXPECT_THROW(lookup_algorithm("no-such-alg"), std::invalid_argument);
  const auto m = models_needed({lookup_algorithm("gpnp-dql"), lookup_algorithm("gpnp-l")});
  EXPECT_EQ(m.size(), 3u);
}

TEST(Grid, InstanceSeedIgnoresAlgorithmAndSchedule) {
  EXPECT_EQ(instance_seed(7, 10, 3), instance_seed(7, 10, 3));
  EXPECT_NE(instance_seed(7, 10, 3), instance_seed(7, 10, 4));
  EXPECT_NE(instance_seed(7, 10, 3), instance_seed(7, 11, 3));
  EXPECT_NE(instance_seed(7, 10, 3), instance_seed(8, 10, 3));
}

TEST(Grid, RerunGivesIdenticalBytes) {
  ExperimentGrid g;
  g.levels = {10};
  g.trials = 1;
  g.algorithms = {"gpnp-l", "mfista"};
  const auto d1 = fresh_dir("det1"), d2 = fresh_dir("det2");
  const auto r1 = run_grid(g, d1.string());
  const auto r2 = run_grid(g, d2.string());
  EXPECT_EQ(slurp(d1 / "recovery.csv"), slurp(d2 / "recovery.csv"));
  EXPECT_FALSE(slurp(d1 / "recovery.csv").empty());
  EXPECT_TRUE(fs::exists(d1 / "timing.csv"));
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(r1.config_hash));
  EXPECT_NE(slurp(d1 / "summary.json").find(hex), std::string::npos);
  EXPECT_EQ(r1.config_hash, fnv1a64(g.canonical()));
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST(Grid, WorkerCountDoesNotChangeResults) {
  ExperimentGrid g;
  g.levels = {8, 12};
  g.trials = 3;
  g.algorithms = {"gpnp-l"};
  const auto a = run_grid(g);
  g.workers = 3;
  const auto b = run_grid(g);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].seed, b.records[i].seed);
    EXPECT_EQ(a.records[i].relative_error, b.records[i].relative_error);
    EXPECT_EQ(a.records[i].iterations, b.records[i].iterations);
  }
}

TEST(Grid, ValidateRejectsBadGrids) {
  ExperimentGrid g;
  g.algorithms = {"gpnp-l"};
  EXPECT_THROW(g.validate(), std::invalid_argument);  // no levels
  g.levels = {300};
  EXPECT_THROW(g.validate(), std::invalid_argument);  // s > n
  g.levels = {5};
  g.algorithms = {"bogus"};
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

// Nonincreasing in s with at most one inversion of <= 3 points.
TEST(Grid, RecoveryRateFallsWithSparsity) {
  ExperimentGrid g;
  g.levels = {6, 14, 22, 30, 38};
  g.trials = 50;
  g.algorithms = {"gpnp-l"};
  const auto res = run_grid(g);
  const auto& rate = res.rate.at("gpnp-l");
  int inversions = 0;
  for (std::size_t i = 1; i < g.levels.size(); ++i) {
    const double up = rate.at(g.levels[i]) - rate.at(g.levels[i - 1]);
    if (up > 0) {
      ++inversions;
      EXPECT_LE(up, 3.0);
    }
  }
  EXPECT_LE(inversions, 1);
  EXPECT_GE(rate.at(6), 95.0);
  EXPECT_LE(rate.at(38), 15.0);
}

TEST(Trajectory, CsvFollowsTrace) {
  const auto alg = lookup_algorithm("gpnp-l");
  const auto inst = generate_cs_instance(64, 256, 12, 77);
  const LeastSquares ls(inst.a, inst.b);
  const auto tr = run_algorithm(alg, ls, 12, compute_scalings(ls.hessian_bound(), models_needed({alg})));
  const auto path = (fs::temp_directory_path() / "wht_traj.csv").string();
  emit_trajectory(tr, path);
  std::ifstream f(path);
  std::string line;
  std::size_t rows = 0;
  bool newton = false;
  double prev = tr.initial_f;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("iter", 0) == 0) continue;
    ++rows;
    std::stringstream ss(line);
    std::string iter, fv, sz, step, event;
    std::getline(ss, iter, ',');
    std::getline(ss, fv, ',');
    std::getline(ss, sz, ',');
    std::getline(ss, step, ',');
    std::getline(ss, event, ',');
    const double fk = std::stod(fv);
    if (event != "restart") {
      EXPECT_LE(fk, prev + 1e-12 * std::abs(prev));
    }
    prev = fk;
    newton |= event == "newton_accepted";
  }
  EXPECT_EQ(rows, tr.records.size());
  EXPECT_TRUE(newton);
  fs::remove(path);
  EXPECT_THROW(emit_trajectory(RunTrace{}, path), std::invalid_argument);
}

// A pattern change: same support size, different support, and an objective
// drop at least the median per-record drop.
TEST(Trajectory, PatternChangeVisibleAtModerateSparsity) {
  const auto alg = lookup_algorithm("gpnp-dql");
  int seeds_with_change = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto inst = generate_cs_instance(64, 256, 20, instance_seed(7, 20, seed));
    const LeastSquares ls(inst.a, inst.b);
    const auto tr = run_algorithm(alg, ls, 20, compute_scalings(ls.hessian_bound(), models_needed({alg})));
    std::vector<double> drops;
    double prev = tr.initial_f;
    for (const auto& r : tr.records) {
      drops.push_back(prev - r.f);
      prev = r.f;
    }
    if (drops.size() < 3) continue;
    auto sorted = drops;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    const double median = sorted[sorted.size() / 2];
    for (std::size_t k = 1; k < tr.records.size(); ++k) {
      const auto& a = tr.records[k - 1];
      const auto& b = tr.records[k];
      if (b.event == Event::restart) continue;
      if (a.support_size == b.support_size && a.support != b.support && drops[k] >= median &&
          drops[k] > 0) {
        ++seeds_with_change;
        break;
      }
    }
  }
  EXPECT_GE(seeds_with_change, 1);
}

TEST(DsmBench, SmallSizeRowsAndGap) {
  DsmBenchOptions opt;
  opt.sizes = {250};
  const auto rows = dsm_benchmark(opt);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) {
    ASSERT_TRUE(r.error.empty()) << r.error;
    EXPECT_EQ(r.trajectory.size(), r.sweeps) << r.model << " " << r.variant;
    EXPECT_LE(r.gap, 0.02) << r.model << " " << r.variant;
    EXPECT_GE(r.primal_objective, r.dual_objective - 1e-9 * std::abs(r.dual_objective));
  }
  const auto dir = fresh_dir("dsm");
  write_dsm_bench(rows, dir.string());
  EXPECT_TRUE(fs::exists(dir / "dsm_timing.csv"));
  EXPECT_TRUE(fs::exists(dir / "dsm_trajectory.csv"));
  fs::remove_all(dir);
}

TEST(DsmBench, ParallelNotSlowerWithWorkers) {
  if (std::thread::hardware_concurrency() < 2) GTEST_SKIP() << "needs at least 2 hardware threads";
  DsmBenchOptions opt;
  opt.sizes = {250};
  opt.workers = 2;
  const auto rows = dsm_benchmark(opt);
  for (const char* model : {"linear", "quadratic"}) {
    double seq = 0, par = 0;
    for (const auto& r : rows) {
      if (r.model != model) continue;
      (r.variant == "parallel" ? par : seq) = r.wall_seconds;
    }
    EXPECT_LE(par, 1.2 * seq) << model;
  }
}

TEST(WorkersFromEnv, ParsesVariable) {
  setenv("WHT_WORKERS", "3", 1);
  EXPECT_EQ(workers_from_env(), 3u);
  setenv("WHT_WORKERS", "abc", 1);
  EXPECT_THROW(workers_from_env(), std::invalid_argument);
  unsetenv("WHT_WORKERS");
  EXPECT_EQ(workers_from_env(2), 2u);
}

}  // namespace
}  // namespace wht
