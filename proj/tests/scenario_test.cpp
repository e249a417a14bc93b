#include "mwsmpc/scenario.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace mwsmpc {
namespace {

TEST(RequiredSampleCount, Examples) {
  EXPECT_EQ(required_sample_count(0.0, std::exp(-1.0), 1), 4);
  EXPECT_EQ(required_sample_count(0.98, 1e-6, 11), 2482);
  EXPECT_EQ(required_sample_count(0.99, 1e-6, 11), 4964);
}

TEST(RequiredSampleCount, RejectsDivergentBound) {
  EXPECT_THROW(required_sample_count(1.0, 1e-6, 3), std::invalid_argument);
  EXPECT_THROW(required_sample_count(0.5, 0.0, 3), std::invalid_argument);
  EXPECT_THROW(required_sample_count(0.5, 1e-6, 0), std::invalid_argument);
}

TEST(RequiredSampleCount, Monotone) {
  for (double s = 0.0; s < 0.995; s += 0.005) {
    for (std::int64_t d = 1; d < 30; ++d) {
      const auto n = required_sample_count(s, 1e-6, d);
      EXPECT_LE(n, required_sample_count(s + 0.005, 1e-6, d));
      EXPECT_LE(n, required_sample_count(s, 1e-6, d + 1));
      EXPECT_GE(n, required_sample_count(s, 1e-5, d));
      // smallest integer meeting the bound
      const double bound = 2.0 / (1.0 - s) * (std::log(1e6) + d);
      EXPECT_GE(static_cast<double>(n), bound * (1 - 1e-12));
      EXPECT_LT(static_cast<double>(n - 1), bound);
    }
  }
}

TEST(DrawScenarios, ZeroCovarianceGivesZeroSamples) {
  RandomStream rng({1, 0, 0, StreamPurpose::kTest});
  const auto batch = draw_scenarios(rng, Eigen::MatrixXd::Zero(2, 2), 3, 50);
  EXPECT_EQ(batch.samples.rows(), 6);
  EXPECT_EQ(batch.count(), 50);
  EXPECT_TRUE(batch.samples.isZero(0.0));
}

TEST(DrawScenarios, EmpiricalVariance) {
  RandomStream rng({2, 0, 0, StreamPurpose::kTest});
  const auto batch = draw_scenarios(rng, 0.04 * Eigen::MatrixXd::Identity(2, 2), 1, 100000);
  for (Eigen::Index r = 0; r < 2; ++r) {
    const auto row = batch.samples.row(r);
    const double mean = row.mean();
    const double var = (row.array() - mean).square().sum() / (row.size() - 1);
    EXPECT_GE(var, 0.038);
    EXPECT_LE(var, 0.042);
    EXPECT_LT(std::abs(mean), 0.003);
  }
}

TEST(DrawScenarios, CorrelatedCovarianceRecovered) {
  Eigen::MatrixXd sigma(2, 2);
  sigma << 1.0, 0.6, 0.6, 0.5;
  RandomStream rng({9, 0, 0, StreamPurpose::kTest});
  const auto batch = draw_scenarios(rng, sigma, 1, 200000);
  const Eigen::MatrixXd emp = batch.samples * batch.samples.transpose() / 200000.0;
  EXPECT_LT((emp - sigma).cwiseAbs().maxCoeff(), 0.01);
}

TEST(DrawScenarios, DeterministicForSameLineage) {
  const StreamId id{42, 3, 5, StreamPurpose::kScenarios};
  RandomStream a(id), b(id);
  const auto x = draw_scenarios(a, 0.04 * Eigen::MatrixXd::Identity(2, 2), 4, 100);
  const auto y = draw_scenarios(b, 0.04 * Eigen::MatrixXd::Identity(2, 2), 4, 100);
  EXPECT_EQ(x.samples, y.samples);
  EXPECT_EQ(x.seed_lineage, id);
  RandomStream c({42, 3, 6, StreamPurpose::kScenarios});
  EXPECT_NE(draw_scenarios(c, 0.04 * Eigen::MatrixXd::Identity(2, 2), 4, 100).samples, x.samples);
}

TEST(DrawScenarios, IndefiniteCovarianceFails) {
  RandomStream rng({1, 0, 0, StreamPurpose::kTest});
  Eigen::MatrixXd bad(2, 2);
  bad << 1, 2, 2, 1;
  EXPECT_THROW(draw_scenarios(rng, bad, 2, 10), std::invalid_argument);
}

TEST(BuildHRows, ZeroSampleGivesStackedOffsets) {
  const auto pred = build_stacked_prediction(testing::case_system(), testing::case_K(),
                                             testing::case_polytope(), 3);
  const Eigen::MatrixXd h = build_h_rows<double>(Eigen::MatrixXd::Zero(6, 1), pred);
  EXPECT_EQ(h.col(0), pred.c_stack);
}

TEST(BuildHRows, ScalarExample) {
  const LinearSystem<double> sys(Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1),
                                 Eigen::MatrixXd::Ones(1, 1));
  const Polytope<double> poly(Eigen::MatrixXd::Ones(1, 1), Eigen::VectorXd::Constant(1, -2));
  const auto pred = build_stacked_prediction(sys, Eigen::MatrixXd::Zero(1, 1), poly, 1);
  const Eigen::MatrixXd h = build_h_rows<double>(Eigen::MatrixXd::Constant(1, 1, 0.3), pred);
  EXPECT_DOUBLE_EQ(h(0, 0), -1.7);
}

TEST(BuildHRows, MatchesErrorRecursion) {
  const auto sys = testing::case_system();
  const auto poly = testing::case_polytope();
  const int h = 11;
  const auto pred = build_stacked_prediction(sys, testing::case_K(), poly, h);
  RandomStream rng({5, 0, 0, StreamPurpose::kTest});
  const auto batch = draw_scenarios(rng, sys.sigma_w(), h, 20);
  const Eigen::MatrixXd rows = build_h_rows(batch.samples, pred);
  const Eigen::MatrixXd a_cl = sys.A() + sys.B() * testing::case_K();
  for (Eigen::Index i = 0; i < batch.count(); ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    for (int t = 0; t < h; ++t) {
      e = a_cl * e + batch.samples.col(i).segment(2 * t, 2);
      const Eigen::VectorXd expected = poly.C() * e + poly.c();
      EXPECT_LT((rows.col(i).segment(4 * t, 4) - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
  EXPECT_THROW(build_h_rows<double>(Eigen::MatrixXd::Zero(5, 1), pred), DimensionError);
}

TEST(ReduceRowmax, Examples) {
  Eigen::MatrixXd one(2, 1);
  one << 3, -4;
  EXPECT_EQ(reduce_rowmax<double>(one).i_max, one.col(0));
  Eigen::MatrixXd two(2, 2);
  two << 1, 0, -3, 5;
  const auto red = reduce_rowmax<double>(two);
  EXPECT_EQ(red.i_max, Eigen::Vector2d(1, 5));
  EXPECT_EQ(red.n_scenarios_used, 2);
  EXPECT_THROW(reduce_rowmax<double>(Eigen::MatrixXd(2, 0)), std::invalid_argument);
}

// Row-max feasibility is equivalent to feasibility for every scenario.
TEST(ReduceRowmax, FeasibilityEquivalence) {
  const auto sys = testing::case_system(0.05);
  const auto poly = testing::case_polytope();
  RandomStream rng({8, 0, 0, StreamPurpose::kTest});
  const int h = 3;
  const auto pred = build_stacked_prediction(sys, testing::case_K(), poly, h);
  int feasible = 0;
  for (int b = 0; b < 20; ++b) {
    const auto batch = draw_scenarios(rng, sys.sigma_w(), h, 1000);
    const Eigen::MatrixXd rows = build_h_rows(batch.samples, pred);
    const auto red = reduce_rowmax(rows);
    for (Eigen::Index j = 0; j < rows.rows(); ++j)
      ASSERT_TRUE((rows.row(j).array() == red.i_max(j)).any());
    for (int c = 0; c < 100; ++c) {
      Eigen::VectorXd x(h * 2);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = (i % 2 ? 1.5 : 3.0) * (2.0 * rng.uniform() - 1.0);
      const Eigen::VectorXd cx = pred.c_blk * x;
      const bool reduced_ok = ((red.i_max + cx).array() <= 0).all();
      bool all_ok = true;
      for (Eigen::Index i = 0; i < rows.cols() && all_ok; ++i)
        all_ok = ((rows.col(i) + cx).array() <= 0).all();
      ASSERT_EQ(reduced_ok, all_ok);
      feasible += all_ok ? 1 : 0;
    }
  }
  EXPECT_GT(feasible, 0);
}

TEST(ReduceRowmax, AddingScenarioNeverDecreases) {
  RandomStream rng({4, 0, 0, StreamPurpose::kTest});
  Eigen::MatrixXd rows = testing::random_matrix(rng, 6, 1);
  Eigen::VectorXd prev = reduce_rowmax<double>(rows).i_max;
  for (int i = 0; i < 50; ++i) {
    rows.conservativeResize(Eigen::NoChange, rows.cols() + 1);
    rows.col(rows.cols() - 1) = testing::random_matrix(rng, 6, 1);
    const Eigen::VectorXd next = reduce_rowmax<double>(rows).i_max;
    EXPECT_TRUE((next.array() >= prev.array()).all());
    prev = next;
  }
}

}  // namespace
}  // namespace mwsmpc
