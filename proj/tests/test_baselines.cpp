#include "test_util.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

using namespace itreg;
using itreg::testing::dense_problem;
using itreg::testing::random_matrix;
using itreg::testing::random_vector;

TEST(TikhonovGrid, ThirtyValuesDescending) {
  const auto g = tikhonov_grid(10.0);
  ASSERT_EQ(g.size(), 30u);
  EXPECT_DOUBLE_EQ(g.front(), 10.0);
  EXPECT_NEAR(g.back(), 2e-5, 1e-18);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LT(g[i], g[i - 1]);
}

TEST(TikhonovPath, LargePenaltyKillsEverything) {
  Xoshiro256 rng(1);
  const Matrix a = random_matrix(5, 8, rng);
  const Vector b = random_vector(5, rng);
  ProblemSpec prob = dense_problem(a, b);
  const auto path = fb_tikhonov_path(prob);
  ASSERT_EQ(path.lambdas.size(), 30u);
  EXPECT_DOUBLE_EQ(path.lambdas.front(), (a.transpose() * b).lpNorm<Eigen::Infinity>());
  EXPECT_EQ(path.solutions.front(), Vector::Zero(8));
  EXPECT_EQ(path.iterations.front(), 1);
  EXPECT_EQ(path.best, -1);
}

TEST(TikhonovPath, BestIsArgminAndWarmStartsDecreaseWork) {
  SparseInstanceConfig cfg;
  cfg.rows = 40;
  cfg.cols = 60;
  cfg.sparsity = 6;
  cfg.noise_amp = 0.02;
  const ProblemSpec prob = gen_sparse_instance(cfg);
  const auto path = fb_tikhonov_path(prob);
  ASSERT_GE(path.best, 0);
  for (double e : path.recon_errors) EXPECT_GE(e, path.recon_errors[static_cast<std::size_t>(path.best)]);
  for (int k : path.iterations) EXPECT_LE(k, 300);

  const RunRecord rec = to_run_record(path, prob);
  ASSERT_EQ(rec.rows.size(), 30u);
  EXPECT_EQ(rec.rows.back().iter, path.total_iterations());
  EXPECT_EQ(rec.early_stop.value, path.recon_errors[static_cast<std::size_t>(path.best)]);
  EXPECT_LT(rec.early_stop.value, prob.ground_truth->norm());
}

TEST(TikhonovPath, RejectsOtherRegularizers) {
  ProblemSpec prob = dense_problem(Matrix::Identity(2, 2), Vector::Ones(2));
  prob.reg = Regularizer::zero();
  EXPECT_THROW(fb_tikhonov_path(prob), std::invalid_argument);
}

TEST(AffineProjector, SquareInvertibleSystemHasOnePoint) {
  Xoshiro256 rng(2);
  const Matrix a = random_matrix(4, 4, rng) + 4.0 * Matrix::Identity(4, 4);
  const Vector b = random_vector(4, rng);
  const AffineProjector p(DenseMap(a), b);
  const Vector sol = a.fullPivLu().solve(b);
  for (int rep = 0; rep < 3; ++rep) {
    EXPECT_LE((p(random_vector(4, rng)) - sol).norm(), 1e-8);
  }
}

TEST(AffineProjector, FeasiblePointIsFixed) {
  Xoshiro256 rng(3);
  const Matrix a = random_matrix(4, 6, rng);
  const Vector x = random_vector(6, rng);
  const AffineProjector p(DenseMap(a), a * x);
  EXPECT_LE((p(x) - x).norm(), 1e-9);
}

TEST(AffineProjector, ClosestFeasiblePoint) {
  Xoshiro256 rng(4);
  const Matrix a = random_matrix(4, 6, rng);
  const Vector b = a * random_vector(6, rng);
  const AffineProjector p(DenseMap(a), b);
  const Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  for (int rep = 0; rep < 5; ++rep) {
    const Vector x = random_vector(6, rng);
    const Vector px = p(x);
    // x - pinv(A) (Ax - b), computed independently.
    const Vector want = x - svd.solve(Vector(a * x - b));
    EXPECT_LE((a * px - b).norm(), 1e-8);
    EXPECT_LE((px - want).norm(), 1e-8);
  }
  EXPECT_EQ(p.failures(), 0);
}

TEST(DouglasRachford, ConvergesToSparseSolutionWithoutNoise) {
  SparseInstanceConfig cfg;
  cfg.rows = 30;
  cfg.cols = 50;
  cfg.sparsity = 3;
  cfg.noise_amp = 0.0;
  const ProblemSpec prob = find_certified_instance(cfg);
  const RunRecord r = douglas_rachford(prob, StopRule::max_iter(500));
  EXPECT_EQ(r.status, RunStatus::ok);
  EXPECT_EQ(r.rows.size(), 500u);
  EXPECT_LE(r.rows.back().recon_error, 1e-6);
  EXPECT_LE((prob.op().apply(r.last_x) - prob.b_delta).norm(), 1e-8);
}

TEST(DouglasRachford, OracleStopAndMetrics) {
  SparseInstanceConfig cfg;
  cfg.rows = 30;
  cfg.cols = 50;
  cfg.sparsity = 3;
  cfg.noise_amp = 0.05;
  const ProblemSpec prob = gen_sparse_instance(cfg);
  const RunRecord r = douglas_rachford(prob, StopRule::oracle(400, 30));
  double best = INFINITY;
  for (const auto& row : r.rows) best = std::min(best, row.recon_error);
  EXPECT_EQ(r.early_stop.value, best);
  EXPECT_TRUE(std::isnan(r.rows.front().lagrangian_gap));
}
