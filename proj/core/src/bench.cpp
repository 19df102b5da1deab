#include "wht/bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <new>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "wht/rng.hpp"
#include "wht/trace_io.hpp"

namespace wht {

namespace {

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double process_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

double wall_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

DenseMatrix gaussian_unit_columns(std::size_t m, std::size_t n, Philox4x32& rng) {
  DenseMatrix a(m, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto col = a.col(j);
    double nn = 0.0;
    while (nn == 0.0) {
      for (double& v : col) v = rng.normal();
      nn = norm2(col);
    }
    for (double& v : col) v /= nn;
  }
  return a;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  return f;
}

}  // namespace

CsInstance generate_cs_instance(std::size_t m, std::size_t n, std::size_t s, std::uint64_t seed) {
  if (m < 1 || n < 1 || s < 1 || s > std::min(m, n)) {
    throw std::invalid_argument("generate_cs_instance: need 1 <= s <= min(m, n)");
  }
  Philox4x32 rng(seed, 1);
  CsInstance inst;
  inst.a = gaussian_unit_columns(m, n, rng);
  Vector x(n, 0.0);
  for (std::size_t i : sample_without_replacement(rng, n, s)) {
    double v = 0.0;
    while (v == 0.0) v = rng.normal();
    x[i] = v;
  }
  inst.b = matvec(inst.a, x);
  inst.x_star = SparseIterate(std::move(x), s);
  inst.s = s;
  inst.seed = seed;
  return inst;
}

RecoveryEval evaluate_recovery(std::span<const double> x, std::span<const double> x_star) {
  if (x.size() != x_star.size()) throw DimensionError("evaluate_recovery: size mismatch");
  const double ref = norm2(x_star);
  if (!(ref > 0.0)) throw std::invalid_argument("evaluate_recovery: ground truth is zero");
  RecoveryEval e;
  e.relative_error = distance(x, x_star) / ref;
  e.recovered = e.relative_error < kRecoveryTol;
  return e;
}

// ---- registry --------------------------------------------------------------

namespace {

constexpr double kTheorySafety = 1.0 + 1e-6;
// Restart scale for the benchmark configurations. Much smaller values throw
// away the whole support on every restart; much larger ones cycle between a
// few local minima.
constexpr double kRestartGamma = 0.02;

using M = DsmModel;

AlgorithmSpec make(std::string name, std::string desc, std::vector<DsmModel> schedule, bool ls,
                   bool restart, bool newton, std::size_t period = 1,
                   Driver driver = Driver::weighted) {
  AlgorithmSpec a;
  a.name = std::move(name);
  a.description = std::move(desc);
  a.driver = driver;
  a.schedule = std::move(schedule);
  a.config.use_line_search = ls;
  a.config.use_restart = restart;
  if (restart) a.config.restart_gamma = kRestartGamma;
  a.config.use_newton = newton;
  a.config.period = period;
  a.safety = ls ? 1.0 : kTheorySafety;
  return a;
}

const std::vector<AlgorithmSpec>& registry() {
  static const std::vector<AlgorithmSpec> algs = [] {
    const std::vector<M> d1{M::quadratic, M::linear, M::lipschitz};
    const std::vector<M> d2{M::linear, M::quadratic, M::lipschitz};
    const std::vector<M> d3{M::linear, M::lipschitz, M::quadratic};
    const std::vector<M> d4{M::quadratic, M::lipschitz, M::linear};
    std::vector<AlgorithmSpec> v;
    v.push_back(make("iht", "thresholded gradient with 1/L step", {M::lipschitz}, false, false, false));
    v.push_back(make("iwht", "cyclic weighted thresholding over DQ, DL, L", d1, false, false, false));
    v.push_back(make("ciwht", "alias of iwht", d1, false, false, false));
    v.push_back(make("iht-lsr", "L step with line search and restart", {M::lipschitz}, true, true, false));
    v.push_back(make("ciwht-lsr", "DQ, DL, L cycle with line search and restart", d1, true, true, false));
    v.push_back(make("gpnp-l", "Newton + L", {M::lipschitz}, true, true, true));
    v.push_back(make("gpnp-dl", "Newton + DL", {M::linear}, true, true, true));
    v.push_back(make("gpnp-dq", "Newton + DQ", {M::quadratic}, true, true, true));
    v.push_back(make("gpnp-dql", "Newton + cycle DQ, DL, L, period 1", d1, true, true, true));
    v.push_back(make("gpnp-d2", "Newton + cycle DL, DQ, L, period 1", d2, true, true, true));
    v.push_back(make("gpnp-d3", "Newton + cycle DL, L, DQ, period 1", d3, true, true, true));
    v.push_back(make("gpnp-d4", "Newton + cycle DQ, L, DL, period 1", d4, true, true, true));
    v.push_back(make("gpnp-d1p10", "Newton + cycle DQ, DL, L, period 10", d1, true, true, true, 10));
    v.push_back(make("gpnp-d2p10", "Newton + cycle DL, DQ, L, period 10", d2, true, true, true, 10));
    v.push_back(make("gpnp-d3p10", "Newton + cycle DL, L, DQ, period 10", d3, true, true, true, 10));
    v.push_back(make("gpnp-d4p10", "Newton + cycle DQ, L, DL, period 10", d4, true, true, true, 10));
    v.push_back(make("mfista", "monotone FISTA over DQ, DL, L with line search and restart", d1, true,
                     true, false, 1, Driver::mfista));
    v.push_back(make("mfista-l", "monotone FISTA with L, line search and restart", {M::lipschitz},
                     true, true, false, 1, Driver::mfista));
    return v;
  }();
  return algs;
}

}  // namespace

std::vector<std::string> algorithm_names() {
  std::vector<std::string> out;
  for (const auto& a : registry()) out.push_back(a.name);
  return out;
}

AlgorithmSpec lookup_algorithm(const std::string& name) {
  for (const auto& a : registry()) {
    if (a.name == name) return a;
  }
  throw std::invalid_argument("unknown algorithm '" + name + "'");
}

DiagonalScaling ScalingSet::scaling(DsmModel model, double safety) const {
  const auto it = solutions.find(model);
  if (it == solutions.end()) {
    throw std::invalid_argument(std::string("ScalingSet: model not computed: ") + to_string(model));
  }
  Vector w = it->second.w;
  const double top = w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
  for (double& v : w) v = std::max(v, 1e-12 * top);
  const char* label = model == DsmModel::linear ? "DL" : model == DsmModel::quadratic ? "DQ" : "L";
  return DiagonalScaling(std::move(w), safety, label);
}

ScalingSet compute_scalings(const DenseMatrix& c, const std::vector<DsmModel>& models,
                            const BcmOptions& opt) {
  ScalingSet out;
  const double t0 = wall_seconds();
  for (DsmModel m : models) {
    if (!out.solutions.count(m)) out.solutions.emplace(m, compute_dsm(c, m, opt));
  }
  out.seconds = wall_seconds() - t0;
  return out;
}

std::vector<DsmModel> models_needed(const std::vector<AlgorithmSpec>& algs) {
  std::vector<DsmModel> out;
  for (const auto& a : algs) {
    for (DsmModel m : a.schedule) {
      if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

RunTrace run_algorithm(const AlgorithmSpec& alg, const ObjectiveModel& model, std::size_t s,
                       const ScalingSet& scalings) {
  std::vector<DiagonalScaling> schedule;
  for (DsmModel m : alg.schedule) schedule.push_back(scalings.scaling(m, alg.safety));
  const SparseIterate x0 = SparseIterate::zeros(model.dimension(), s);
  if (alg.driver == Driver::mfista) return mfista(model, x0, schedule, alg.config);
  return gpnp(model, x0, schedule, alg.config);
}

std::size_t count_descent_violations(const RunTrace& trace, double rel_tol) {
  std::size_t bad = 0;
  double prev = trace.initial_f;
  for (const auto& r : trace.records) {
    if (r.event != Event::restart && r.f > prev + rel_tol * std::abs(prev)) ++bad;
    prev = r.f;
  }
  return bad;
}

// ---- grid ------------------------------------------------------------------

void ExperimentGrid::validate() const {
  if (trials < 1) throw std::invalid_argument("grid: trials must be >= 1");
  if (levels.empty()) throw std::invalid_argument("grid: no sparsity levels");
  if (algorithms.empty()) throw std::invalid_argument("grid: no algorithms");
  for (std::size_t s : levels) {
    if (s < 1 || s > m || s > n) throw std::invalid_argument("grid: sparsity level outside [1, m]");
  }
  for (const auto& a : algorithms) lookup_algorithm(a);
  if (max_iters < 1) throw std::invalid_argument("grid: max_iters must be >= 1");
}

std::string ExperimentGrid::canonical() const {
  std::ostringstream os;
  os << "m=" << m << ";n=" << n << ";levels=";
  for (std::size_t i = 0; i < levels.size(); ++i) os << (i ? "," : "") << levels[i];
  os << ";trials=" << trials << ";algorithms=";
  for (std::size_t i = 0; i < algorithms.size(); ++i) os << (i ? "," : "") << algorithms[i];
  os << ";seed=" << master_seed << ";max_iters=" << max_iters;
  return os.str();
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t instance_seed(std::uint64_t master, std::size_t s, std::size_t trial) {
  return mix_seed(master, mix_seed(static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(trial)));
}

GridResult run_grid(const ExperimentGrid& grid, const std::optional<std::string>& out_dir,
                    const std::function<void(const RecoveryRecord&, const RunTrace&)>& observer) {
  grid.validate();
  std::vector<AlgorithmSpec> algs;
  for (const auto& name : grid.algorithms) {
    AlgorithmSpec a = lookup_algorithm(name);
    a.config.max_iters = grid.max_iters;
    a.config.record_support = false;
    algs.push_back(std::move(a));
  }
  const std::vector<DsmModel> models = models_needed(algs);

  struct Task {
    std::size_t s, trial;
  };
  std::vector<Task> tasks;
  for (std::size_t s : grid.levels) {
    for (std::size_t t = 0; t < grid.trials; ++t) tasks.push_back({s, t});
  }
  std::vector<std::vector<RecoveryRecord>> slots(tasks.size());
  std::mutex observe_mu;
  std::atomic<std::size_t> next{0};

  auto work = [&] {
    for (std::size_t idx = next++; idx < tasks.size(); idx = next++) {
      const Task& task = tasks[idx];
      const std::uint64_t seed = instance_seed(grid.master_seed, task.s, task.trial);
      const CsInstance inst = generate_cs_instance(grid.m, grid.n, task.s, seed);
      const LeastSquares model(inst.a, inst.b);
      BcmOptions bopt;
      bopt.seed = seed;
      const ScalingSet scalings = compute_scalings(model.hessian_bound(), models, bopt);
      for (const auto& alg : algs) {
        RecoveryRecord rec;
        rec.algorithm = alg.name;
        rec.s = task.s;
        rec.trial = task.trial;
        rec.seed = seed;
        rec.dsm_seconds = scalings.seconds;
        const double w0 = wall_seconds(), c0 = thread_cpu_seconds();
        try {
          const RunTrace trace = run_algorithm(alg, model, task.s, scalings);
          rec.cpu_seconds = thread_cpu_seconds() - c0;
          rec.wall_seconds = wall_seconds() - w0;
          const RecoveryEval ev = evaluate_recovery(trace.x, inst.x_star.x);
          rec.recovered = ev.recovered;
          rec.relative_error = ev.relative_error;
          rec.iterations = trace.iterations;
          rec.restarts = trace.restarts;
          rec.descent_violations = count_descent_violations(trace);
          rec.termination = to_string(trace.termination);
          if (observer) {
            std::lock_guard lock(observe_mu);
            observer(rec, trace);
          }
        } catch (const std::exception& e) {
          rec.cpu_seconds = thread_cpu_seconds() - c0;
          rec.wall_seconds = wall_seconds() - w0;
          rec.recovered = false;
          rec.relative_error = std::nan("");
          rec.termination = std::string("error: ") + e.what();
        }
        slots[idx].push_back(std::move(rec));
      }
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(grid.workers, static_cast<unsigned>(tasks.size())));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  }

  GridResult result;
  result.config_hash = fnv1a64(grid.canonical());
  std::map<std::string, std::map<std::size_t, std::size_t>> hits;
  for (auto& slot : slots) {
    for (auto& r : slot) {
      if (r.recovered) ++hits[r.algorithm][r.s];
      result.records.push_back(std::move(r));
    }
  }
  for (const auto& name : grid.algorithms) {
    for (std::size_t s : grid.levels) {
      result.rate[name][s] = 100.0 * static_cast<double>(hits[name][s]) / static_cast<double>(grid.trials);
    }
  }

  if (out_dir) {
    std::filesystem::create_directories(*out_dir);
    write_recovery_csv(result, *out_dir + "/recovery.csv");
    write_timing_csv(result, *out_dir + "/timing.csv");
    auto f = open_out(*out_dir + "/summary.json");
    f << summary_json(grid, result) << '\n';
  }
  return result;
}

void write_recovery_csv(const GridResult& result, const std::string& path) {
  auto f = open_out(path);
  f << "# wht-recovery v1\n";
  f << "algorithm,s,trial,seed,recovered,relative_error,iterations,restarts,descent_violations,termination\n";
  for (const auto& r : result.records) {
    f << r.algorithm << ',' << r.s << ',' << r.trial << ',' << r.seed << ',' << (r.recovered ? 1 : 0)
      << ',' << format_real(r.relative_error) << ',' << r.iterations << ',' << r.restarts << ','
      << r.descent_violations << ',' << '"' << r.termination << '"' << '\n';
  }
}

void write_timing_csv(const GridResult& result, const std::string& path) {
  auto f = open_out(path);
  f << "# wht-timing v1\n";
  f << "algorithm,s,trial,cpu_seconds,wall_seconds,dsm_seconds\n";
  for (const auto& r : result.records) {
    f << r.algorithm << ',' << r.s << ',' << r.trial << ',' << format_real(r.cpu_seconds) << ','
      << format_real(r.wall_seconds) << ',' << format_real(r.dsm_seconds) << '\n';
  }
}

std::string summary_json(const ExperimentGrid& grid, const GridResult& result) {
  nlohmann::ordered_json j;
  j["schema_version"] = 1;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(result.config_hash));
  j["config_hash"] = hash;
  j["config"] = {{"m", grid.m},
                 {"n", grid.n},
                 {"levels", grid.levels},
                 {"trials", grid.trials},
                 {"algorithms", grid.algorithms},
                 {"master_seed", grid.master_seed},
                 {"max_iters", grid.max_iters}};
  nlohmann::ordered_json rates = nlohmann::ordered_json::object();
  for (const auto& name : grid.algorithms) {
    nlohmann::ordered_json per = nlohmann::ordered_json::object();
    for (std::size_t s : grid.levels) per[std::to_string(s)] = result.rate.at(name).at(s);
    rates[name] = per;
  }
  j["recovery_rate_percent"] = rates;
  return j.dump(2);
}

void emit_trajectory(const RunTrace& trace, const std::string& path) {
  if (trace.records.empty()) throw std::invalid_argument("emit_trajectory: empty trace");
  write_trace_csv(trace, path);
}

// ---- DSM benchmark ---------------------------------------------------------

namespace {

// Row-major k x k Gram B1^T B2.
std::vector<double> cross_gram(const DenseMatrix& b1, const DenseMatrix& b2) {
  const std::size_t k1 = b1.cols(), k2 = b2.cols();
  std::vector<double> g(k1 * k2);
  for (std::size_t p = 0; p < k1; ++p) {
    for (std::size_t q = 0; q < k2; ++q) g[p * k2 + q] = dot(b1.col(p), b2.col(q));
  }
  return g;
}

double frob2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

// ||B B^T - F F^T||_F / ||F F^T||_F via k x k products.
double factor_distance(const DenseMatrix& b, const DenseMatrix& f, double ff) {
  const double bb = frob2(cross_gram(b, b));
  const double bf = frob2(cross_gram(b, f));
  return std::sqrt(std::max(0.0, bb + ff - 2.0 * bf)) / std::sqrt(ff);
}

}  // namespace

std::vector<DsmBenchRow> dsm_benchmark(const DsmBenchOptions& opt) {
  std::vector<DsmBenchRow> rows;
  for (std::size_t n : opt.sizes) {
    const std::size_t m = std::max<std::size_t>(1, n / 8);
    try {
      Philox4x32 rng(mix_seed(opt.seed, n), 2);
      const DenseMatrix c = gram(gaussian_unit_columns(m, n, rng));
      for (DsmModel model : {DsmModel::linear, DsmModel::quadratic}) {
        for (bool parallel : {false, true}) {
          DsmBenchRow row;
          row.n = n;
          row.model = to_string(model);
          row.variant = parallel ? "parallel" : "sequential";
          BcmOptions bopt;
          bopt.seed = opt.seed;
          bopt.sweeps = opt.sweeps;
          bopt.parallel = parallel;
          bopt.workers = opt.workers;
          const double w0 = wall_seconds(), c0 = process_cpu_seconds();
          const BmFactor f = run_bcm(c, model, bopt);
          row.wall_seconds = wall_seconds() - w0;
          row.cpu_seconds = process_cpu_seconds() - c0;
          row.rank = f.rank();
          row.sweeps = f.sweeps;

          Vector w = model == DsmModel::linear ? extract_primal_linear(f.b, c) : extract_primal_quadratic(f.b);
          for (double& v : w) v = std::max(v, 0.0);
          w = repair_feasibility(w, c, model);
          row.dual_objective = f.dual_history.back();
          row.primal_objective = model == DsmModel::linear ? [&] {
            double s = 0.0;
            for (double v : w) s += v;
            return s;
          }() : 0.5 * dot(w, w);
          row.gap = (row.primal_objective - row.dual_objective) / std::max(1.0, std::abs(row.dual_objective));

          // Second, identical pass to measure distance to the final iterate.
          const double ff = frob2(cross_gram(f.b, f.b));
          bopt.on_sweep = [&](std::size_t, const DenseMatrix& b) {
            row.trajectory.push_back(factor_distance(b, f.b, ff));
          };
          run_bcm(c, model, bopt);
          rows.push_back(std::move(row));
        }
      }
    } catch (const std::bad_alloc&) {
      DsmBenchRow row;
      row.n = n;
      row.error = "out of memory";
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_dsm_bench(const std::vector<DsmBenchRow>& rows, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  auto t = open_out(out_dir + "/dsm_timing.csv");
  t << "# wht-dsm-timing v1\n";
  t << "n,model,variant,rank,sweeps,wall_seconds,cpu_seconds,dual_objective,primal_objective,gap,error\n";
  for (const auto& r : rows) {
    t << r.n << ',' << r.model << ',' << r.variant << ',' << r.rank << ',' << r.sweeps << ','
      << format_real(r.wall_seconds) << ',' << format_real(r.cpu_seconds) << ','
      << format_real(r.dual_objective) << ',' << format_real(r.primal_objective) << ','
      << format_real(r.gap) << ',' << r.error << '\n';
  }
  auto tr = open_out(out_dir + "/dsm_trajectory.csv");
  tr << "# wht-dsm-trajectory v1\n";
  tr << "n,model,variant,sweep,z_relative_error\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.trajectory.size(); ++i) {
      tr << r.n << ',' << r.model << ',' << r.variant << ',' << (i + 1) << ','
         << format_real(r.trajectory[i]) << '\n';
    }
  }
}

unsigned workers_from_env(unsigned fallback) {
  const char* v = std::getenv("WHT_WORKERS");
  if (!v || !*v) return std::max(1u, fallback);
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 0) throw std::invalid_argument("WHT_WORKERS must be a nonnegative integer");
  if (n == 0) return std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(n);
}

}  // namespace wht
