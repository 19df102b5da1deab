#include "wht/solvers.hpp"

#include <cmath>
#include <deque>
#include <numeric>

namespace wht {

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("SolverConfig: ") + what); };
  if (max_iters < 1) fail("max_iters must be >= 1");
  if (!(residual_tol >= 0.0)) fail("residual_tol must be >= 0");
  if (trace_window < 2) fail("trace_window must be >= 2");
  if (!(ls_alpha > 0.0 && ls_alpha < 1.0)) fail("ls_alpha must lie in (0, 1)");
  if (ls_trials < 1) fail("ls_trials must be >= 1");
  if (!(ls_beta > 0.0)) fail("ls_beta must be > 0");
  if (!(restart_gamma > 0.0 && restart_gamma < 1.0)) fail("restart_gamma must lie in (0, 1)");
  if (!(newton_beta > 0.0)) fail("newton_beta must be > 0");
  if (period < 1) fail("period must be >= 1");
  if (!(fixed_point_tol >= 0.0)) fail("fixed_point_tol must be >= 0");
}

const char* to_string(Event e) {
  switch (e) {
    case Event::gradient: return "gradient";
    case Event::newton_accepted: return "newton_accepted";
    case Event::newton_rejected: return "newton_rejected";
    case Event::restart: return "restart";
    case Event::dsm_switch: return "dsm_switch";
  }
  return "?";
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::residual: return "residual";
    case Termination::stagnation: return "stagnation";
    case Termination::fixed_point: return "fixed_point";
    case Termination::max_iters: return "max_iters";
  }
  return "?";
}

SparseIterate weighted_step(const SparseIterate& x, std::span<const double> gradient,
                            const DiagonalScaling& d, double factor) {
  const std::size_t n = x.x.size();
  if (gradient.size() != n || d.size() != n) throw DimensionError("weighted_step: size mismatch");
  const double sf = factor == 1.0 ? 1.0 : std::sqrt(factor);
  const Vector& sd = d.sqrt_weights();
  Vector z(n), mag(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = sf * sd[i];
    z[i] = r * x.x[i] - gradient[i] / r;
    mag[i] = std::abs(z[i]);
  }
  Vector y(n, 0.0);
  for (std::size_t i : top_s_indices(mag, x.s)) y[i] = z[i] / (sf * sd[i]);
  return {std::move(y), x.s};
}

namespace {

struct Point {
  SparseIterate x;
  double f = 0.0;
};

double checked_value(const ObjectiveModel& model, std::span<const double> x, std::size_t iter) {
  const double f = model.value(x);
  if (!std::isfinite(f)) throw NonFiniteError("nonfinite objective", iter);
  return f;
}

Vector checked_gradient(const ObjectiveModel& model, std::span<const double> x, std::size_t iter) {
  Vector g = model.gradient(x);
  if (!all_finite(g)) throw NonFiniteError("nonfinite gradient", iter);
  return g;
}

Point search(const ObjectiveModel& model, const SparseIterate& x, double fx,
             std::span<const double> g, const DiagonalScaling& d, double alpha,
             std::size_t trials, double beta, std::size_t iter) {
  Point out;
  for (std::size_t j = 1; j <= trials; ++j) {
    const double factor = std::pow(alpha, static_cast<double>(trials - j));
    out.x = weighted_step(x, g, d, factor);
    out.f = checked_value(model, out.x.x, iter);
    const double dist = distance(out.x.x, x.x);
    if (out.f <= fx - beta * dist * dist) break;
  }
  return out;
}

// Restricted Newton on the support of x; nullopt on rejection.
std::optional<Point> newton(const ObjectiveModel& model, const SparseIterate& x, double fx,
                            std::span<const double> g, double beta, std::size_t iter) {
  const IndexSet s = x.support();
  if (s.empty()) return std::nullopt;
  const DenseMatrix h = model.restricted_hessian(x.x, s);
  Vector rhs(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) rhs[k] = -g[s[k]];
  const auto delta = solve_spd_restricted(h, IndexSet::range(s.size()), rhs);
  if (!delta) return std::nullopt;
  Vector v = x.x;
  double step2 = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    v[s[k]] += (*delta)[k];
    step2 += (*delta)[k] * (*delta)[k];
  }
  // Cancellation can zero an entry but never adds one, so v stays feasible.
  Point p{SparseIterate(std::move(v), x.s), 0.0};
  p.f = model.value(p.x.x);
  if (!std::isfinite(p.f)) throw NonFiniteError("nonfinite objective in Newton step", iter);
  if (p.f <= fx - beta * step2) return p;
  return std::nullopt;
}

bool is_fixed(double step, const Vector& x, double tol) { return step <= tol * std::max(1.0, norm2(x)); }

bool residual_met(const ObjectiveModel& model, const Vector& x, double tol) {
  const auto r = model.residual_norm(x);
  return r && *r <= tol;
}

bool residual_above(const ObjectiveModel& model, const Vector& x, double tol) {
  const auto r = model.residual_norm(x);
  return r && *r > tol;
}

double window_std(const std::deque<double>& w) {
  const double n = static_cast<double>(w.size());
  const double mean = std::accumulate(w.begin(), w.end(), 0.0) / n;
  double var = 0.0;
  for (double v : w) var += (v - mean) * (v - mean);
  return std::sqrt(var / n);
}

class Recorder {
 public:
  Recorder(RunTrace& trace, bool keep_support) : trace_(trace), keep_(keep_support) {}

  void add(std::size_t iter, const SparseIterate& x, double f, double step, Event ev,
           std::optional<double> momentum = std::nullopt) {
    TraceRecord r;
    r.iter = iter;
    r.f = f;
    r.support_size = x.nnz();
    if (keep_) r.support = x.support();
    r.step_norm = step;
    r.event = ev;
    r.momentum_t = momentum;
    trace_.records.push_back(std::move(r));
  }

 private:
  RunTrace& trace_;
  bool keep_;
};

void check_start(const ObjectiveModel& model, const SparseIterate& x0) {
  const std::size_t n = model.dimension();
  if (x0.x.size() != n) throw DimensionError("solver: len(x0) != n");
  if (x0.s < 1 || x0.s > n) throw std::invalid_argument("solver: s outside [1, n]");
  if (x0.nnz() > x0.s) throw std::invalid_argument("solver: x0 is not s-sparse");
}

void check_schedule(const ObjectiveModel& model, const std::vector<DiagonalScaling>& schedule) {
  if (schedule.empty()) throw std::invalid_argument("solver: empty scaling schedule");
  for (const auto& d : schedule) {
    if (d.size() != model.dimension()) throw DimensionError("solver: scaling size != n");
  }
}

}  // namespace

SparseIterate line_search_step(const ObjectiveModel& model, const SparseIterate& x, double fx,
                               std::span<const double> gradient, const DiagonalScaling& d,
                               double alpha, std::size_t trials, double beta) {
  if (!(alpha > 0.0 && alpha < 1.0) || trials < 1 || !(beta > 0.0)) {
    throw std::invalid_argument("line_search_step: need alpha in (0,1), J >= 1, beta > 0");
  }
  return search(model, x, fx, gradient, d, alpha, trials, beta, 0).x;
}

SparseIterate line_search_step(const ObjectiveModel& model, const SparseIterate& x,
                               const DiagonalScaling& d, double alpha, std::size_t trials,
                               double beta) {
  return line_search_step(model, x, model.value(x.x), model.gradient(x.x), d, alpha, trials, beta);
}

SparseIterate restart_step(const ObjectiveModel& model, const SparseIterate& x,
                           const DiagonalScaling& d, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("restart_step: gamma outside (0,1)");
  return weighted_step(x, model.gradient(x.x), d, gamma);
}

SparseIterate newton_step(const ObjectiveModel& model, const SparseIterate& x, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("newton_step: beta must be > 0");
  const auto p = newton(model, x, model.value(x.x), model.gradient(x.x), beta, 0);
  return p ? p->x : x;
}

RunTrace gpnp(const ObjectiveModel& model, const SparseIterate& x0,
              const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg) {
  cfg.validate();
  check_start(model, x0);
  check_schedule(model, schedule);

  RunTrace trace;
  Recorder rec(trace, cfg.record_support);
  SparseIterate x = x0;
  double fx = checked_value(model, x.x, 0);
  Vector g = checked_gradient(model, x.x, 0);
  trace.initial_f = fx;
  trace.termination = Termination::max_iters;

  if (residual_met(model, x.x, cfg.residual_tol)) {
    trace.termination = Termination::residual;
    trace.x = x.x;
    return trace;
  }

  std::deque<double> window;
  std::size_t prev = schedule.size();
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    trace.iterations = it;
    const std::size_t idx = ((it - 1) / cfg.period) % schedule.size();
    const DiagonalScaling& d = schedule[idx];
    const bool switched = prev != schedule.size() && prev != idx;
    prev = idx;

    Point z = cfg.use_line_search
                  ? search(model, x, fx, g, d, cfg.ls_alpha, cfg.ls_trials, cfg.ls_beta, it)
                  : Point{weighted_step(x, g, d), 0.0};
    if (!cfg.use_line_search) z.f = checked_value(model, z.x.x, it);
    const double step = distance(z.x.x, x.x);
    const bool fixed = is_fixed(step, x.x, cfg.fixed_point_tol);
    x = std::move(z.x);
    fx = z.f;
    g = checked_gradient(model, x.x, it);
    rec.add(it, x, fx, step, switched ? Event::dsm_switch : Event::gradient);
    if (residual_met(model, x.x, cfg.residual_tol)) {
      trace.termination = Termination::residual;
      break;
    }

    if (fixed) {
      if (!cfg.use_restart || !residual_above(model, x.x, cfg.residual_tol)) {
        trace.termination = Termination::fixed_point;
        break;
      }
      SparseIterate jump = weighted_step(x, g, d, cfg.restart_gamma);
      const double jstep = distance(jump.x, x.x);
      x = std::move(jump);
      fx = checked_value(model, x.x, it);
      g = checked_gradient(model, x.x, it);
      ++trace.restarts;
      rec.add(it, x, fx, jstep, Event::restart);
      if (residual_met(model, x.x, cfg.residual_tol)) {
        trace.termination = Termination::residual;
        break;
      }
    }
    // Newton follows whichever step this iteration took, restart included.
    if (cfg.use_newton) {
      if (auto v = newton(model, x, fx, g, cfg.newton_beta, it)) {
        const double nstep = distance(v->x.x, x.x);
        x = std::move(v->x);
        fx = v->f;
        g = checked_gradient(model, x.x, it);
        rec.add(it, x, fx, nstep, Event::newton_accepted);
        if (residual_met(model, x.x, cfg.residual_tol)) {
          trace.termination = Termination::residual;
          break;
        }
      } else {
        rec.add(it, x, fx, 0.0, Event::newton_rejected);
      }
    }

    if (cfg.use_newton) {
      window.push_back(fx);
      if (window.size() > cfg.trace_window) window.pop_front();
      if (window.size() == cfg.trace_window && window_std(window) < cfg.trace_std_tol) {
        trace.termination = Termination::stagnation;
        break;
      }
    }
  }
  trace.x = std::move(x.x);
  return trace;
}

RunTrace ciwht(const ObjectiveModel& model, const SparseIterate& x0,
               const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg) {
  SolverConfig plain = cfg;
  plain.use_line_search = false;
  plain.use_restart = false;
  plain.use_newton = false;
  return gpnp(model, x0, schedule, plain);
}

RunTrace iwht(const ObjectiveModel& model, const SparseIterate& x0, const DiagonalScaling& d,
              const SolverConfig& cfg) {
  return ciwht(model, x0, {d}, cfg);
}

RunTrace bpg(const ObjectiveModel& model, const SparseIterate& x0, const SeparableKernel& h,
             double lipschitz, const SolverConfig& cfg) {
  cfg.validate();
  check_start(model, x0);
  if (h.size() != model.dimension()) throw DimensionError("bpg: kernel size != n");
  if (!(lipschitz > 0.0)) throw std::invalid_argument("bpg: L must be > 0");

  RunTrace trace;
  Recorder rec(trace, cfg.record_support);
  SparseIterate x = x0;
  double fx = checked_value(model, x.x, 0);
  Vector g = checked_gradient(model, x.x, 0);
  trace.initial_f = fx;
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    trace.iterations = it;
    SparseIterate y = separable_bregman_argmin(g, x, h, lipschitz);
    const double step = distance(y.x, x.x);
    const bool fixed = is_fixed(step, x.x, cfg.fixed_point_tol);
    x = std::move(y);
    fx = checked_value(model, x.x, it);
    g = checked_gradient(model, x.x, it);
    rec.add(it, x, fx, step, Event::gradient);
    if (residual_met(model, x.x, cfg.residual_tol)) {
      trace.termination = Termination::residual;
      break;
    }
    if (fixed) {
      trace.termination = Termination::fixed_point;
      break;
    }
  }
  trace.x = std::move(x.x);
  return trace;
}

RunTrace mfista(const ObjectiveModel& model, const SparseIterate& x0,
                const std::vector<DiagonalScaling>& schedule, const SolverConfig& cfg) {
  cfg.validate();
  check_start(model, x0);
  check_schedule(model, schedule);

  RunTrace trace;
  Recorder rec(trace, cfg.record_support);
  SparseIterate x = x0;
  double fx = checked_value(model, x.x, 0);
  trace.initial_f = fx;
  trace.termination = Termination::max_iters;
  if (residual_met(model, x.x, cfg.residual_tol)) {
    trace.termination = Termination::residual;
    trace.x = x.x;
    return trace;
  }

  SparseIterate y = x;
  double t = 1.0;
  const std::size_t n = x.x.size();
  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    trace.iterations = it;
    const DiagonalScaling& d = schedule[((it - 1) / cfg.period) % schedule.size()];
    const double fy = checked_value(model, y.x, it);
    const Vector gy = checked_gradient(model, y.x, it);
    Point z = cfg.use_line_search
                  ? search(model, y, fy, gy, d, cfg.ls_alpha, cfg.ls_trials, cfg.ls_beta, it)
                  : Point{weighted_step(y, gy, d), 0.0};
    if (!cfg.use_line_search) z.f = checked_value(model, z.x.x, it);

    const bool take = z.f <= fx;
    const SparseIterate& xn = take ? z.x : x;
    const double xn_f = take ? z.f : fx;
    const double step = distance(xn.x, x.x);
    const bool same_support = z.x.support() == x.support();

    SparseIterate ynext;
    if (same_support) {
      const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      Vector v(n);
      for (std::size_t i = 0; i < n; ++i) {
        v[i] = xn.x[i] + (t / tn) * (z.x.x[i] - xn.x[i]) + ((t - 1.0) / tn) * (xn.x[i] - x.x[i]);
      }
      t = tn;
      ynext = SparseIterate(std::move(v), x.s);
    } else {
      t = 1.0;
      ynext = xn;
    }
    const bool stalled = is_fixed(distance(z.x.x, x.x), x.x, cfg.fixed_point_tol);
    x = xn;
    fx = xn_f;
    y = std::move(ynext);
    rec.add(it, x, fx, step, Event::gradient, t);
    if (residual_met(model, x.x, cfg.residual_tol)) {
      trace.termination = Termination::residual;
      break;
    }
    if (stalled) {
      if (!cfg.use_restart || !residual_above(model, x.x, cfg.residual_tol)) {
        trace.termination = Termination::fixed_point;
        break;
      }
      SparseIterate jump = weighted_step(x, checked_gradient(model, x.x, it), d, cfg.restart_gamma);
      const double jstep = distance(jump.x, x.x);
      x = std::move(jump);
      fx = checked_value(model, x.x, it);
      y = x;
      t = 1.0;
      ++trace.restarts;
      rec.add(it, x, fx, jstep, Event::restart, t);
      if (residual_met(model, x.x, cfg.residual_tol)) {
        trace.termination = Termination::residual;
        break;
      }
    }
  }
  trace.x = std::move(x.x);
  return trace;
}

}  // namespace wht
