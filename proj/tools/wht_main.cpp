// wht: command line front end for the sparse solvers, the DSM models and the
// compressed-sensing benchmark.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "wht/bench.hpp"
#include "wht/dsm.hpp"
#include "wht/matrix_io.hpp"
#include "wht/trace_io.hpp"

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void print_rates(const wht::ExperimentGrid& grid, const wht::GridResult& res) {
  std::printf("%6s", "s");
  for (const auto& a : grid.algorithms) std::printf(" %12s", a.c_str());
  std::printf("\n");
  for (std::size_t s : grid.levels) {
    std::printf("%6zu", s);
    for (const auto& a : grid.algorithms) std::printf(" %12.1f", res.rate.at(a).at(s));
    std::printf("\n");
  }
}

nlohmann::json dsm_json(const wht::DsmSolution& sol) {
  return {{"model", wht::to_string(sol.model)},
          {"w", sol.w},
          {"dual_objective", sol.dual_objective},
          {"primal_objective", sol.primal_objective},
          {"gap", sol.gap},
          {"feasibility_margin", sol.feasibility_margin},
          {"iterations", sol.iterations},
          {"eigen_converged", sol.eigen_converged}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse least-squares solvers with diagonal scaling"};
  app.set_config("--config", "", "key=value configuration file");
  app.require_subcommand(1);

  // bench cs / bench dsm
  auto* bench = app.add_subcommand("bench", "run benchmarks");
  bench->require_subcommand(1);

  auto* cs = bench->add_subcommand("cs", "compressed-sensing recovery grid");
  std::size_t m = 64, n = 256, s_min = 5, s_max = 35, s_step = 1, trials = 50, max_iters = 15000;
  std::string algs = "gpnp-l,gpnp-dql,iht-lsr,ciwht-lsr";
  std::uint64_t seed = 7;
  std::string out = "results";
  std::string levels_arg;
  bool paper_scale = false;
  cs->add_option("--m", m, "measurements")->capture_default_str();
  cs->add_option("--n", n, "signal length")->capture_default_str();
  cs->add_option("--s-min", s_min)->capture_default_str();
  cs->add_option("--s-max", s_max)->capture_default_str();
  cs->add_option("--s-step", s_step)->capture_default_str();
  cs->add_option("--levels", levels_arg, "explicit comma-separated sparsity levels");
  cs->add_option("--trials", trials)->capture_default_str();
  cs->add_option("--algs", algs, "comma-separated algorithm names")->capture_default_str();
  cs->add_option("--seed", seed)->capture_default_str();
  cs->add_option("--max-iters", max_iters)->capture_default_str();
  cs->add_option("--out", out, "output directory")->capture_default_str();
  cs->add_flag("--paper-scale", paper_scale, "500 trials per level");

  auto* dsmb = bench->add_subcommand("dsm", "DSM computation cost");
  std::string sizes = "250,500,1000";
  std::size_t bench_sweeps = 300;
  std::uint64_t dsm_seed = 11;
  std::string dsm_out = "results";
  dsmb->add_option("--sizes", sizes)->capture_default_str();
  dsmb->add_option("--sweeps", bench_sweeps)->capture_default_str();
  dsmb->add_option("--seed", dsm_seed)->capture_default_str();
  dsmb->add_option("--out", dsm_out)->capture_default_str();

  // solve
  auto* solve = app.add_subcommand("solve", "solve one sparse least-squares problem");
  std::string matrix_path, rhs_path, alg = "gpnp-l", trace_path, x_path;
  std::size_t s = 0;
  solve->add_option("--matrix", matrix_path, "A as row-major CSV")->required()->check(CLI::ExistingFile);
  solve->add_option("--rhs", rhs_path, "b as CSV")->required()->check(CLI::ExistingFile);
  solve->add_option("--s", s, "sparsity budget")->required();
  solve->add_option("--alg", alg)->capture_default_str();
  solve->add_option("--trace", trace_path, "write the iteration trace CSV here");
  solve->add_option("--x-out", x_path, "write the solution vector CSV here");

  // dsm
  auto* dsm = app.add_subcommand("dsm", "compute a diagonal scaling for a PSD matrix");
  std::string model = "linear", input, weights_path;
  wht::BcmOptions bopt;
  dsm->add_option("--model", model, "linear | quadratic | lipschitz")
      ->check(CLI::IsMember({"linear", "quadratic", "lipschitz"}))
      ->capture_default_str();
  dsm->add_option("--input", input, "C as CSV")->required()->check(CLI::ExistingFile);
  dsm->add_option("--k", bopt.rank, "factor rank (0: automatic)")->capture_default_str();
  dsm->add_option("--sweeps", bopt.sweeps)->capture_default_str();
  dsm->add_option("--seed", bopt.seed)->capture_default_str();
  dsm->add_flag("--parallel", bopt.parallel, "row-parallel sweeps");
  dsm->add_option("--weights", weights_path, "write w as CSV here");

  auto* list = app.add_subcommand("list-algs", "show registered algorithms");

  CLI11_PARSE(app, argc, argv);

  try {
    const unsigned workers = wht::workers_from_env(1);

    if (*list) {
      for (const auto& name : wht::algorithm_names()) {
        std::printf("%-12s %s\n", name.c_str(), wht::lookup_algorithm(name).description.c_str());
      }
      return 0;
    }

    if (*cs) {
      wht::ExperimentGrid grid;
      grid.m = m;
      grid.n = n;
      if (!levels_arg.empty()) {
        for (const auto& t : split_list(levels_arg)) grid.levels.push_back(std::stoul(t));
      } else {
        if (s_step < 1) throw std::invalid_argument("--s-step must be >= 1");
        for (std::size_t v = s_min; v <= s_max; v += s_step) grid.levels.push_back(v);
      }
      grid.trials = paper_scale ? 500 : trials;
      grid.algorithms = split_list(algs);
      grid.master_seed = seed;
      grid.workers = workers;
      grid.max_iters = max_iters;
      const auto res = wht::run_grid(grid, out);
      print_rates(grid, res);
      std::printf("wrote %s/recovery.csv, timing.csv, summary.json\n", out.c_str());
      return 0;
    }

    if (*dsmb) {
      wht::DsmBenchOptions opt;
      opt.sizes.clear();
      for (const auto& t : split_list(sizes)) opt.sizes.push_back(std::stoul(t));
      opt.seed = dsm_seed;
      opt.sweeps = bench_sweeps;
      opt.workers = workers;
      const auto rows = wht::dsm_benchmark(opt);
      wht::write_dsm_bench(rows, dsm_out);
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          std::printf("n=%zu: %s\n", r.n, r.error.c_str());
          continue;
        }
        std::printf("n=%-5zu %-9s %-10s sweeps=%-4zu wall=%.3fs cpu=%.3fs gap=%.2e\n", r.n,
                    r.model.c_str(), r.variant.c_str(), r.sweeps, r.wall_seconds, r.cpu_seconds, r.gap);
      }
      return 0;
    }

    if (*solve) {
      const wht::LeastSquares ls(wht::read_matrix_csv(matrix_path), wht::read_vector_csv(rhs_path));
      const wht::AlgorithmSpec spec = wht::lookup_algorithm(alg);
      wht::BcmOptions sopt;
      const auto scalings = wht::compute_scalings(ls.hessian_bound(), wht::models_needed({spec}), sopt);
      const wht::RunTrace trace = wht::run_algorithm(spec, ls, s, scalings);
      if (!trace_path.empty()) wht::emit_trajectory(trace, trace_path);
      if (!x_path.empty()) wht::write_vector_csv(trace.x, x_path);
      nlohmann::json j{{"algorithm", alg},
                       {"termination", wht::to_string(trace.termination)},
                       {"iterations", trace.iterations},
                       {"restarts", trace.restarts},
                       {"f", trace.final_f()},
                       {"residual", *ls.residual_norm(trace.x)},
                       {"support", wht::IndexSet::support_of(trace.x).indices()},
                       {"x", trace.x}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*dsm) {
      bopt.workers = workers;
      const wht::DenseMatrix c = wht::read_matrix_csv(input);
      const wht::DsmSolution sol = wht::compute_dsm(c, wht::parse_dsm_model(model), bopt);
      if (!weights_path.empty()) wht::write_vector_csv(sol.w, weights_path);
      std::cout << dsm_json(sol).dump(2) << '\n';
      return 0;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "wht: %s\n", e.what());
    return 1;
  }
  return 0;
}
