#include <gtest/gtest.h>

#include <cmath>

#include "support/oracles.hpp"
#include "wht/dsm.hpp"

namespace wht {
namespace {

DenseMatrix random_gram(Philox4x32& rng, std::size_t m, std::size_t n) {
  return gram(testing::normalized_columns(testing::random_matrix(rng, m, n)));
}

double sum(const Vector& w) {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

double half_sq(const Vector& w) { return 0.5 * dot(w, w); }

double row_norm(const DenseMatrix& b, std::size_t i) {
  double s = 0.0;
  for (std::size_t j = 0; j < b.cols(); ++j) s += b(i, j) * b(i, j);
  return std::sqrt(s);
}

TEST(Lipschitz, Examples) {
  const auto id = compute_lipschitz(DenseMatrix::identity(4));
  for (double v : id.w) EXPECT_NEAR(v, 1.0, 1e-12);
  const auto diag = compute_lipschitz(DenseMatrix::diagonal(Vector{1, 5, 3}));
  for (double v : diag.w) EXPECT_NEAR(v, 5.0, 1e-12);
  EXPECT_NEAR(diag.gap, 0.0, 1e-12);
}

TEST(Lipschitz, FeasibleOnGaussianGram) {
  Philox4x32 rng(1);
  const auto c = random_gram(rng, 16, 64);
  const auto sol = compute_lipschitz(c);
  EXPECT_GE(testing::oracle_margin(sol.w, c), -1e-8);
  EXPECT_NEAR(sol.w[0], testing::oracle_lambda_max(c), 1e-8 * sol.w[0]);
}

TEST(BcmLinear, DiagonalMatrixLeavesFactorAlone) {
  const auto c = DenseMatrix::diagonal(Vector{1, 2, 3, 4});
  const auto init = initial_factor(4, 3, 5);
  const auto f = bcm_linear(c, 3, 10, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(f.b(i, j), init(i, j));
  EXPECT_NEAR(dual_objective_linear(c, f.b), 10.0, 1e-12);
}

TEST(BcmLinear, TwoByTwoReachesOptimum) {
  const auto c = DenseMatrix::from_rows({{0, 1}, {1, 0}});
  const auto f = bcm_linear(c, 2, 50, 3);
  EXPECT_NEAR(dual_objective_linear(c, f.b), 2.0, 1e-10);
}

TEST(BcmLinear, MonotoneWithUnitRows) {
  Philox4x32 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + rep % 16;
    const auto c = testing::random_psd(rng, n, 1 + rep % n);
    DenseMatrix b = initial_factor(n, default_rank(n), rep);
    double prev = dual_objective_linear(c, b);
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double now = bcm_linear_sweep(c, b);
      EXPECT_GE(now, prev - 1e-12 * std::abs(prev));
      EXPECT_NEAR(now, dual_objective_linear(c, b), 1e-9 * std::max(1.0, std::abs(now)));
      prev = now;
      for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(row_norm(b, i), 1.0, 1e-12);
    }
  }
}

TEST(BcmQuadratic, Monotone) {
  Philox4x32 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 4 + rep % 17;
    const auto c = testing::random_psd(rng, n, 2 + rep % 5);
    DenseMatrix b = initial_factor(n, default_rank(n), rep);
    double prev = dual_objective_quadratic(c, b);
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double now = bcm_quadratic_sweep(c, b);
      EXPECT_GE(now, prev - 1e-12 * std::max(1.0, std::abs(prev)));
      prev = now;
    }
  }
}

TEST(BcmQuadratic, HistoryIsNondecreasing) {
  Philox4x32 rng(4);
  const auto c = random_gram(rng, 6, 15);
  const auto f = bcm_quadratic(c, default_rank(15), 100, 9);
  ASSERT_GE(f.dual_history.size(), 2u);
  for (std::size_t t = 1; t < f.dual_history.size(); ++t)
    EXPECT_GE(f.dual_history[t], f.dual_history[t - 1] - 1e-12 * std::abs(f.dual_history[t - 1]));
}

TEST(CubicRoot, Examples) {
  EXPECT_NEAR(cubic_positive_root(0, 27), 3.0, 1e-12);
  EXPECT_NEAR(cubic_positive_root(-1, 2), 1.0, 1e-12);
  EXPECT_NEAR(cubic_positive_root(3, 2), 2.0, 1e-12);
  EXPECT_NEAR(cubic_positive_root(0, 8), 2.0, 1e-12);
}

TEST(CubicRoot, DegenerateAndInvalid) {
  EXPECT_DOUBLE_EQ(cubic_positive_root(4, 0), 2.0);
  EXPECT_EQ(cubic_positive_root(-1, 0), 0.0);
  EXPECT_THROW(cubic_positive_root(1, -1), std::invalid_argument);
  EXPECT_THROW(cubic_positive_root(NAN, 1), std::invalid_argument);
}

TEST(CubicRoot, ResidualAndUniqueness) {
  Philox4x32 rng(5);
  for (int rep = 0; rep < 2000; ++rep) {
    const double c = 10.0 * rng.normal();
    const double g = std::exp(6.0 * rng.normal());
    const double t = cubic_positive_root(c, g);
    ASSERT_GT(t, 0.0);
    EXPECT_LE(std::abs(t * t * t - c * t - g), 1e-12 * std::max(1.0, g)) << c << " " << g;
    // p(t) = t^3 - c t - g is negative below the root and positive above.
    const auto p = [&](double u) { return u * u * u - c * u - g; };
    EXPECT_LT(p(0.5 * t), 0.0);
    EXPECT_GT(p(2.0 * t), 0.0);
  }
}

TEST(ParallelSweep, SingleRowLinearMatchesSequential) {
  const auto c = DenseMatrix::from_rows({{2.5}});
  DenseMatrix a = initial_factor(1, 2, 1), b = a;
  for (int t = 0; t < 5; ++t) {
    bcm_linear_sweep(c, a);
    bcm_parallel_sweep(c, b, DsmModel::linear);
  }
  EXPECT_NEAR(a(0, 0), b(0, 0), 1e-15);
  EXPECT_NEAR(a(0, 1), b(0, 1), 1e-15);
}

// The minorizer step reaches the sequential fixed point ||b||^2 = C_11 at a
// cube-root rate rather than in one sweep.
TEST(ParallelSweep, SingleRowQuadraticReachesSequentialFixedPoint) {
  const auto c = DenseMatrix::from_rows({{2.5}});
  DenseMatrix a = initial_factor(1, 2, 1), b = a;
  bcm_quadratic_sweep(c, a);
  for (int t = 0; t < 60; ++t) bcm_parallel_sweep(c, b, DsmModel::quadratic);
  EXPECT_NEAR(dual_objective_quadratic(c, a), 3.125, 1e-12);
  EXPECT_NEAR(dual_objective_quadratic(c, b), 3.125, 1e-12);
  EXPECT_NEAR(a(0, 0), b(0, 0), 1e-10);
  EXPECT_NEAR(a(0, 1), b(0, 1), 1e-10);
}

TEST(ParallelSweep, DiagonalLinearIsNoOp) {
  const auto c = DenseMatrix::diagonal(Vector{1, 2, 3});
  const auto a = initial_factor(3, 2, 4);
  DenseMatrix b = a;
  bcm_parallel_sweep(c, b, DsmModel::linear);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) EXPECT_NEAR(b(i, j), a(i, j), 1e-15);
}

TEST(ParallelSweep, WorkerCountDoesNotChangeResult) {
  Philox4x32 rng(6);
  const auto c = random_gram(rng, 8, 20);
  DenseMatrix a = initial_factor(20, 7, 1), b = a;
  for (int t = 0; t < 10; ++t) {
    bcm_parallel_sweep(c, a, DsmModel::quadratic, 1);
    bcm_parallel_sweep(c, b, DsmModel::quadratic, 3);
  }
  for (std::size_t i = 0; i < 20; ++i)
    for (std::size_t j = 0; j < 7; ++j) EXPECT_EQ(a(i, j), b(i, j));
}

TEST(ParallelSweep, GapWithinTwiceSequential) {
  Philox4x32 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 6 + rep % 15;
    const auto c = testing::random_psd(rng, n, 2 + rep % 4);
    for (DsmModel model : {DsmModel::linear, DsmModel::quadratic}) {
      BcmOptions opt;
      opt.seed = rep;
      const auto seq = compute_dsm(c, model, opt);
      opt.parallel = true;
      const auto par = compute_dsm(c, model, opt);
      EXPECT_LE(par.gap, std::max(2.0 * seq.gap, 1e-4)) << to_string(model) << " n=" << n;
    }
  }
}

TEST(ExtractLinear, Examples) {
  const auto c = DenseMatrix::from_rows({{2, 0.5, 0}, {0.5, 3, 1}, {0, 1, 4}});
  const auto w = extract_primal_linear(DenseMatrix::identity(3), c);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(w[i], c(i, i), 1e-14);

  // Z = [[1,1],[1,1]] = b b^T with b = (1,1)^T.
  const auto w2 = extract_primal_linear(DenseMatrix::from_rows({{1}, {1}}),
                                        DenseMatrix::from_rows({{0, 1}, {1, 0}}));
  EXPECT_NEAR(w2[0], 1.0, 1e-14);
  EXPECT_NEAR(w2[1], 1.0, 1e-14);
}

TEST(ExtractLinear, NearFeasibleBeforeRepair) {
  Philox4x32 rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 10;
    const auto c = testing::random_psd(rng, n, 1 + rep % n);
    const auto f = bcm_linear(c, default_rank(n), 300, rep);
    const auto w = extract_primal_linear(f.b, c);
    EXPECT_GE(testing::oracle_margin(w, c), -1e-4 * testing::oracle_lambda_max(c)) << "n=" << n;
  }
}

TEST(ExtractQuadratic, Examples) {
  const auto w = extract_primal_quadratic(initial_factor(5, 3, 2));
  for (double v : w) EXPECT_NEAR(v, 1.0, 1e-14);
  for (double v : extract_primal_quadratic(DenseMatrix(4, 2, 0.0))) EXPECT_EQ(v, 0.0);
}

TEST(ExtractQuadratic, PrimalWithinOnePercentOfDual) {
  Philox4x32 rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 10;
    const auto c = testing::random_psd(rng, n, 1 + rep % 4);
    const auto f = bcm_quadratic(c, default_rank(n), 300, rep);
    const double dual = dual_objective_quadratic(c, f.b);
    const double primal = half_sq(extract_primal_quadratic(f.b));
    EXPECT_NEAR(primal, dual, 0.01 * std::max(1.0, std::abs(dual))) << "n=" << n;
  }
}

TEST(Repair, FeasibleInputUnchanged) {
  const auto c = DenseMatrix::from_rows({{1, 0.5}, {0.5, 1}});
  const Vector w{2, 2};
  EXPECT_EQ(repair_feasibility(w, c), w);
}

TEST(Repair, ZeroWeightsOnIdentity) {
  const auto w = repair_feasibility(Vector{0, 0, 0}, DenseMatrix::identity(3));
  for (double v : w) EXPECT_NEAR(v, 1.0 + 1e-6, 1e-12);
}

TEST(Repair, NonPositiveMatrixReturnsInput) {
  const auto c = DenseMatrix::diagonal(Vector{-1, -2});
  EXPECT_EQ(repair_feasibility(Vector{0.1, 0.2}, c), (Vector{0.1, 0.2}));
}

TEST(Repair, CertifiedByOracle) {
  Philox4x32 rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    const auto c = testing::random_psd(rng, 20, 2 + rep);
    for (DsmModel model : {DsmModel::linear, DsmModel::quadratic}) {
      const auto f = model == DsmModel::linear ? bcm_linear(c, 8, 40, rep) : bcm_quadratic(c, 8, 40, rep);
      const auto w = model == DsmModel::linear ? extract_primal_linear(f.b, c) : extract_primal_quadratic(f.b);
      const auto fixed = repair_feasibility(w, c, model);
      EXPECT_GE(testing::oracle_margin(fixed, c), -1e-12 * testing::oracle_lambda_max(c));
    }
  }
}

TEST(ComputeDsm, LipschitzExample) {
  const auto sol = compute_dsm(DenseMatrix::diagonal(Vector{1, 5, 3}), DsmModel::lipschitz);
  for (double v : sol.w) EXPECT_NEAR(v, 5.0, 1e-12);
  EXPECT_NEAR(sol.gap, 0.0, 1e-12);
}

TEST(ComputeDsm, NeverWorseThanUniform) {
  Philox4x32 rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto c = random_gram(rng, 16, 64);
    BcmOptions opt;
    opt.seed = rep;
    const auto lip = compute_lipschitz(c);
    const auto lin = compute_dsm(c, DsmModel::linear, opt);
    const auto quad = compute_dsm(c, DsmModel::quadratic, opt);
    EXPECT_LE(sum(lin.w), 64 * testing::oracle_lambda_max(c) * (1 + 1e-9));
    EXPECT_LE(sum(lin.w), sum(lip.w) * (1 + 1e-9));
    EXPECT_LE(half_sq(quad.w), half_sq(lip.w) * (1 + 1e-9));
  }
}

TEST(ComputeDsm, FeasibleAfterRepair) {
  Philox4x32 rng(12);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 5 + rep % 16;
    const auto c = testing::random_psd(rng, n, 1 + rep % 6);
    for (DsmModel model : {DsmModel::linear, DsmModel::quadratic, DsmModel::lipschitz}) {
      const auto sol = compute_dsm(c, model);
      const double top = testing::oracle_lambda_max(c);
      EXPECT_GE(testing::oracle_margin(sol.w, c), -1e-10 * top) << to_string(model);
      for (double v : sol.w) EXPECT_GT(v, 0.0);
    }
  }
}

// dual(BCM) <= optimum <= any feasible primal. Both the repaired extraction and
// the coordinate-reduction oracle point are feasible.
TEST(ComputeDsm, DualitySandwich) {
  Philox4x32 rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 3 + rep % 10;
    const auto c = testing::random_psd(rng, n, 1 + rep % 4);
    const auto upper = testing::dsm_feasible_upper(c);
    ASSERT_GE(testing::oracle_margin(upper, c), -1e-8);
    BcmOptions opt;
    opt.seed = rep;
    const auto lin = compute_dsm(c, DsmModel::linear, opt);
    const auto quad = compute_dsm(c, DsmModel::quadratic, opt);
    const double tol = 1e-9;
    EXPECT_LE(lin.dual_objective, sum(upper) + tol);
    EXPECT_LE(lin.dual_objective, sum(lin.w) + tol);
    EXPECT_LE(quad.dual_objective, half_sq(upper) + tol);
    EXPECT_LE(quad.dual_objective, half_sq(quad.w) + tol);
    EXPECT_NEAR(lin.primal_objective, sum(lin.w), 1e-12 * sum(lin.w));
    EXPECT_NEAR(quad.primal_objective, half_sq(quad.w), 1e-12 * half_sq(quad.w));
    EXPECT_LE(lin.gap, 0.01);
    EXPECT_LE(quad.gap, 0.01);
  }
}

TEST(ComputeDsm, EarlyExitAndParseModel) {
  const auto sol = compute_dsm(DenseMatrix::diagonal(Vector{1, 2, 3}), DsmModel::linear);
  EXPECT_LT(sol.iterations, 300u);
  EXPECT_EQ(parse_dsm_model("quadratic"), DsmModel::quadratic);
  EXPECT_THROW(parse_dsm_model("cubic"), std::invalid_argument);
}

}  // namespace
}  // namespace wht
