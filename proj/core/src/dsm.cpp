#include "wht/dsm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "wht/rng.hpp"

namespace wht {

const char* to_string(DsmModel m) {
  switch (m) {
    case DsmModel::linear: return "linear";
    case DsmModel::quadratic: return "quadratic";
    case DsmModel::lipschitz: return "lipschitz";
  }
  return "?";
}

DsmModel parse_dsm_model(const std::string& name) {
  if (name == "linear") return DsmModel::linear;
  if (name == "quadratic") return DsmModel::quadratic;
  if (name == "lipschitz") return DsmModel::lipschitz;
  throw std::invalid_argument("unknown DSM model '" + name + "'");
}

std::size_t default_rank(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(2.0 * static_cast<double>(n)))) + 1;
}

namespace {

void check_square(const DenseMatrix& c, const char* op) {
  if (c.rows() != c.cols()) throw DimensionError(std::string(op) + ": C must be square");
}

// Row-major copy of an n x k factor: row j occupies [j*k, (j+1)*k).
struct Rows {
  std::size_t n = 0, k = 0;
  std::vector<double> v;

  explicit Rows(const DenseMatrix& b) : n(b.rows()), k(b.cols()), v(n * k) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) v[i * k + j] = b(i, j);
    }
  }
  double* row(std::size_t i) { return v.data() + i * k; }
  const double* row(std::size_t i) const { return v.data() + i * k; }

  void store(DenseMatrix& b) const {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < n; ++i) b(i, j) = v[i * k + j];
    }
  }
};

double dotk(const double* a, const double* b, std::size_t k) {
  double s = 0.0;
  for (std::size_t t = 0; t < k; ++t) s += a[t] * b[t];
  return s;
}

// G rows [lo, hi) of C B (row form).
void product_rows(const DenseMatrix& c, const Rows& b, std::vector<double>& g, std::size_t lo,
                  std::size_t hi) {
  const std::size_t k = b.k;
  for (std::size_t j = lo; j < hi; ++j) {
    double* gj = g.data() + j * k;
    std::fill(gj, gj + k, 0.0);
    const auto cj = c.col(j);
    for (std::size_t i = 0; i < b.n; ++i) {
      const double w = cj[i];
      if (w == 0.0) continue;
      const double* bi = b.row(i);
      for (std::size_t t = 0; t < k; ++t) gj[t] += w * bi[t];
    }
  }
}

void product(const DenseMatrix& c, const Rows& b, std::vector<double>& g, unsigned workers) {
  g.assign(b.n * b.k, 0.0);
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(b.n)));
  if (workers == 1) {
    product_rows(c, b, g, 0, b.n);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (b.n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(b.n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi] { product_rows(c, b, g, lo, hi); });
  }
}

double objective_from(const Rows& b, const std::vector<double>& g, DsmModel model) {
  double s = 0.0;
  for (std::size_t i = 0; i < b.n; ++i) {
    s += dotk(b.row(i), g.data() + i * b.k, b.k);
    if (model == DsmModel::quadratic) {
      const double r = dotk(b.row(i), b.row(i), b.k);
      s -= 0.5 * r * r;
    }
  }
  return s;
}

// Off-diagonal coupling g = sum_{i != j} C_ij b_i.
void coupling(const DenseMatrix& c, const Rows& b, std::size_t j, std::vector<double>& g) {
  std::fill(g.begin(), g.end(), 0.0);
  const auto cj = c.col(j);
  for (std::size_t i = 0; i < b.n; ++i) {
    const double w = cj[i];
    if (i == j || w == 0.0) continue;
    const double* bi = b.row(i);
    for (std::size_t t = 0; t < b.k; ++t) g[t] += w * bi[t];
  }
}

// Row maximizer given the off-diagonal coupling g. Linear: g / ||g||, row kept
// when g = 0. Quadratic: t g / ||g|| with t the positive root of
// t^3 - C_jj t - ||g|| = 0; for g = 0 the row keeps its direction.
void update_row(double* bj, const double* g, double cjj, std::size_t k, DsmModel model) {
  const double gn = std::sqrt(dotk(g, g, k));
  if (model == DsmModel::linear) {
    if (gn == 0.0) return;
    for (std::size_t t = 0; t < k; ++t) bj[t] = g[t] / gn;
    return;
  }
  const double t = cubic_positive_root(cjj, gn);
  if (gn > 0.0) {
    for (std::size_t q = 0; q < k; ++q) bj[q] = t * g[q] / gn;
    return;
  }
  const double bn = std::sqrt(dotk(bj, bj, k));
  if (bn > 0.0) {
    for (std::size_t q = 0; q < k; ++q) bj[q] *= t / bn;
  } else if (t > 0.0) {
    bj[0] = t;
  }
}

// One sequential sweep in row form; returns the change in dual objective.
double sweep_rows(const DenseMatrix& c, Rows& b, DsmModel model) {
  std::vector<double> g(b.k), old(b.k);
  double delta = 0.0;
  for (std::size_t j = 0; j < b.n; ++j) {
    coupling(c, b, j, g);
    double* bj = b.row(j);
    std::copy(bj, bj + b.k, old.begin());
    const double cjj = c(j, j);
    update_row(bj, g.data(), cjj, b.k, model);
    const double on = dotk(old.data(), old.data(), b.k);
    const double nn = dotk(bj, bj, b.k);
    double d = 0.0;
    for (std::size_t q = 0; q < b.k; ++q) d += g[q] * (bj[q] - old[q]);
    delta += 2.0 * d + cjj * (nn - on);
    if (model == DsmModel::quadratic) delta -= 0.5 * (nn * nn - on * on);
  }
  return delta;
}

// Jacobi update from the pre-sweep products G = C B, diagonal included. For
// PSD C, <C, B B^T> >= 2 <C B0, B> - <C B0, B0>, so maximizing the minorizer
// row by row gives B_j = G_j / ||G_j|| (linear) and ||G_j||^{1/3} G_j / ||G_j||
// (quadratic), and the dual objective cannot decrease.
void parallel_update(Rows& b, const std::vector<double>& g, DsmModel model) {
  for (std::size_t j = 0; j < b.n; ++j) {
    const double* gj = g.data() + j * b.k;
    const double gn = std::sqrt(dotk(gj, gj, b.k));
    if (gn == 0.0) continue;
    const double scale = model == DsmModel::linear ? 1.0 / gn : std::cbrt(gn) / gn;
    double* bj = b.row(j);
    for (std::size_t t = 0; t < b.k; ++t) bj[t] = scale * gj[t];
  }
}

double dual_objective(const DenseMatrix& c, const DenseMatrix& b, DsmModel model) {
  check_square(c, "dual_objective");
  if (b.rows() != c.rows()) throw DimensionError("dual_objective: rows(B) != n");
  Rows r(b);
  std::vector<double> g;
  product(c, r, g, 1);
  return objective_from(r, g, model);
}

double model_cost(const Vector& w, DsmModel model) {
  switch (model) {
    case DsmModel::linear: {
      double s = 0.0;
      for (double v : w) s += v;
      return s;
    }
    case DsmModel::quadratic: return 0.5 * dot(w, w);
    case DsmModel::lipschitz: return w.empty() ? 0.0 : *std::max_element(w.begin(), w.end());
  }
  return 0.0;
}

}  // namespace

DenseMatrix initial_factor(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("initial_factor: k must be >= 1");
  Philox4x32 rng(seed, 0xB0);
  Rows r(DenseMatrix(n, k));
  for (std::size_t i = 0; i < n; ++i) {
    double* bi = r.row(i);
    double nn = 0.0;
    while (nn == 0.0) {
      for (std::size_t t = 0; t < k; ++t) bi[t] = rng.normal();
      nn = std::sqrt(dotk(bi, bi, k));
    }
    for (std::size_t t = 0; t < k; ++t) bi[t] /= nn;
  }
  DenseMatrix b(n, k);
  r.store(b);
  return b;
}

double dual_objective_linear(const DenseMatrix& c, const DenseMatrix& b) {
  return dual_objective(c, b, DsmModel::linear);
}

double dual_objective_quadratic(const DenseMatrix& c, const DenseMatrix& b) {
  return dual_objective(c, b, DsmModel::quadratic);
}

double cubic_positive_root(double c, double g) {
  if (!std::isfinite(c) || !std::isfinite(g) || g < 0.0) {
    throw std::invalid_argument("cubic_positive_root: need finite c and g >= 0");
  }
  if (g == 0.0) return std::sqrt(std::max(c, 0.0));
  using ld = long double;
  const ld cl = c, gl = g;
  const ld root_c = std::sqrt(std::max<ld>(cl, 0.0L));
  ld lo = root_c;                 // p(lo) = -g < 0
  ld hi = root_c + std::cbrt(gl);  // p(hi) >= 0
  ld t = std::max({static_cast<ld>(1.5) * root_c, std::cbrt(gl), static_cast<ld>(1.0)});
  t = std::clamp(t, lo, hi);
  for (int it = 0; it < 200; ++it) {
    const ld p = t * t * t - cl * t - gl;
    if (p == 0.0L) break;
    if (p < 0.0L) lo = t; else hi = t;
    const ld dp = 3.0L * t * t - cl;
    ld next = dp > 0.0L ? t - p / dp : 0.5L * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5L * (lo + hi);
    if (std::abs(next - t) <= 4.0L * std::numeric_limits<ld>::epsilon() * t) {
      t = next;
      break;
    }
    t = next;
  }
  return static_cast<double>(t);
}

double bcm_linear_sweep(const DenseMatrix& c, DenseMatrix& b) {
  check_square(c, "bcm_linear_sweep");
  Rows r(b);
  sweep_rows(c, r, DsmModel::linear);
  r.store(b);
  return dual_objective_linear(c, b);
}

double bcm_quadratic_sweep(const DenseMatrix& c, DenseMatrix& b) {
  check_square(c, "bcm_quadratic_sweep");
  Rows r(b);
  sweep_rows(c, r, DsmModel::quadratic);
  r.store(b);
  return dual_objective_quadratic(c, b);
}

void bcm_parallel_sweep(const DenseMatrix& c, DenseMatrix& b, DsmModel model, unsigned workers) {
  check_square(c, "bcm_parallel_sweep");
  if (model == DsmModel::lipschitz) throw std::invalid_argument("bcm_parallel_sweep: no BCM for lipschitz");
  Rows r(b);
  std::vector<double> g;
  product(c, r, g, workers);
  parallel_update(r, g, model);
  r.store(b);
}

BmFactor run_bcm(const DenseMatrix& c, DsmModel model, const BcmOptions& opt) {
  check_square(c, "run_bcm");
  if (model == DsmModel::lipschitz) throw std::invalid_argument("run_bcm: no BCM for lipschitz");
  const std::size_t n = c.rows();
  const std::size_t k = opt.rank ? opt.rank : default_rank(n);

  BmFactor out;
  Rows r(initial_factor(n, k, opt.seed));
  std::vector<double> g;
  product(c, r, g, opt.parallel ? opt.workers : 1);
  double obj = objective_from(r, g, model);
  out.dual_history.push_back(obj);

  for (std::size_t sweep = 1; sweep <= opt.sweeps; ++sweep) {
    if (opt.parallel) {
      parallel_update(r, g, model);
      product(c, r, g, opt.workers);
      obj = objective_from(r, g, model);
    } else {
      obj += sweep_rows(c, r, model);
    }
    out.dual_history.push_back(obj);
    out.sweeps = sweep;
    if (opt.on_sweep) {
      DenseMatrix snap(n, k);
      r.store(snap);
      opt.on_sweep(sweep, snap);
    }
    if (opt.window > 0 && sweep >= opt.window) {
      const double past = out.dual_history[sweep - opt.window];
      if (std::abs(obj - past) <= opt.rel_tol * std::max(1.0, std::abs(obj))) break;
    }
  }
  out.b = DenseMatrix(n, k);
  r.store(out.b);
  // Replace the running sum with an exact evaluation.
  out.dual_history.back() = dual_objective(c, out.b, model);
  return out;
}

BmFactor bcm_linear(const DenseMatrix& c, std::size_t k, std::size_t sweeps, std::uint64_t seed) {
  BcmOptions opt;
  opt.rank = k;
  opt.sweeps = sweeps;
  opt.seed = seed;
  opt.window = 0;
  return run_bcm(c, DsmModel::linear, opt);
}

BmFactor bcm_quadratic(const DenseMatrix& c, std::size_t k, std::size_t sweeps,
                       std::uint64_t seed) {
  BcmOptions opt;
  opt.rank = k;
  opt.sweeps = sweeps;
  opt.seed = seed;
  opt.window = 0;
  return run_bcm(c, DsmModel::quadratic, opt);
}

Vector extract_primal_linear(const DenseMatrix& b, const DenseMatrix& c) {
  check_square(c, "extract_primal_linear");
  if (b.rows() != c.rows()) throw DimensionError("extract_primal_linear: rows(B) != n");
  const Rows r(b);
  const std::size_t n = r.n, k = r.k;
  std::vector<double> g;
  product(c, r, g, 1);
  // M = B^T B (k x k, row-major)
  std::vector<double> m(k * k, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* bi = r.row(i);
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = 0; q < k; ++q) m[p * k + q] += bi[p] * bi[q];
    }
  }
  Vector w(n), mb(k);
  for (std::size_t i = 0; i < n; ++i) {
    const double* bi = r.row(i);
    const double* gi = g.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) mb[p] = dotk(m.data() + p * k, bi, k);
    const double den = dotk(mb.data(), bi, k);  // z_i^T z_i
    if (den >= 1e-14) {
      w[i] = dotk(mb.data(), gi, k) / den;  // z_i^T (Z C)_i
    } else {
      const double zii = dotk(bi, bi, k);
      w[i] = zii > 0.0 ? dotk(bi, gi, k) / zii : 0.0;
    }
  }
  return w;
}

Vector extract_primal_quadratic(const DenseMatrix& b) {
  const Rows r(b);
  Vector w(r.n);
  for (std::size_t i = 0; i < r.n; ++i) w[i] = dotk(r.row(i), r.row(i), r.k);
  return w;
}

double feasibility_margin(const Vector& w, const DenseMatrix& c) {
  check_square(c, "feasibility_margin");
  if (w.size() != c.rows()) throw DimensionError("feasibility_margin: len(w) != n");
  DenseMatrix m(c.rows(), c.cols());
  for (std::size_t j = 0; j < c.cols(); ++j) {
    for (std::size_t i = 0; i < c.rows(); ++i) m(i, j) = -c(i, j);
    m(j, j) += w[j];
  }
  return min_eigenvalue(m).value;
}

Vector repair_feasibility(const Vector& w, const DenseMatrix& c, DsmModel model) {
  check_square(c, "repair_feasibility");
  if (w.size() != c.rows()) throw DimensionError("repair_feasibility: len(w) != n");
  const double top = max_eigenvalue(c).value;
  if (top <= 0.0) return w;
  // Feasibility is certified by Cholesky rather than by the Lanczos estimate,
  // which can settle on the wrong member of a cluster of tiny eigenvalues.
  const double eps = 1e-12 * top;
  auto feasible = [&](const Vector& v) {
    DenseMatrix m(c.rows(), c.cols());
    for (std::size_t j = 0; j < c.cols(); ++j) {
      for (std::size_t i = 0; i < c.rows(); ++i) m(i, j) = -c(i, j);
      m(j, j) += v[j];
    }
    return cholesky_succeeds(m, eps);
  };
  if (feasible(w)) return w;

  const double m0 = std::abs(std::min(feasibility_margin(w, c), 0.0));
  double extra = m0 * (1.0 + 1e-6);
  Vector shifted;
  for (double bump = std::max(1e-6 * m0, 2.0 * eps);; bump *= 2.0) {
    shifted = w;
    for (double& v : shifted) v += extra;
    if (feasible(shifted)) break;
    extra += bump;
  }

  auto scaled = [&](int j) {
    Vector out = w;
    const double f = std::pow(1.01, j);
    for (double& v : out) v *= f;
    return out;
  };
  // Largest j with 1.01^j <= 2.
  constexpr int kMaxPower = 69;
  if (!feasible(scaled(kMaxPower))) return shifted;
  int lo = 0, hi = kMaxPower;  // lo infeasible, hi feasible
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (feasible(scaled(mid))) hi = mid; else lo = mid;
  }
  Vector geometric = scaled(hi);
  return model_cost(geometric, model) <= model_cost(shifted, model) ? geometric : shifted;
}

DsmSolution compute_lipschitz(const DenseMatrix& c, double tol) {
  check_square(c, "compute_lipschitz");
  const EigenEstimate est = max_eigenvalue(c, tol);
  DsmSolution out;
  out.model = DsmModel::lipschitz;
  out.w.assign(c.rows(), est.value);
  out.primal_objective = est.value;
  out.dual_objective = dot(est.vector, symv(c, est.vector));
  out.gap = (out.primal_objective - out.dual_objective) / std::max(1.0, std::abs(out.dual_objective));
  out.feasibility_margin = feasibility_margin(out.w, c);
  out.iterations = est.iterations;
  out.eigen_converged = est.converged;
  return out;
}

DsmSolution compute_dsm(const DenseMatrix& c, DsmModel model, const BcmOptions& opt) {
  check_square(c, "compute_dsm");
  if (model == DsmModel::lipschitz) return compute_lipschitz(c);

  const BmFactor f = run_bcm(c, model, opt);
  Vector w = model == DsmModel::linear ? extract_primal_linear(f.b, c) : extract_primal_quadratic(f.b);
  for (double& v : w) v = std::max(v, 0.0);
  w = repair_feasibility(w, c, model);

  DsmSolution out;
  out.model = model;
  out.w = std::move(w);
  out.dual_objective = f.dual_history.back();
  out.primal_objective = model_cost(out.w, model);
  out.gap = (out.primal_objective - out.dual_objective) / std::max(1.0, std::abs(out.dual_objective));
  out.feasibility_margin = feasibility_margin(out.w, c);
  out.iterations = f.sweeps;
  out.dual_history = f.dual_history;
  return out;
}

}  // namespace wht
