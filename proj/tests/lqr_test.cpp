#include "mwsmpc/lqr.hpp"

#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace mwsmpc {
namespace {

Eigen::MatrixXd scalar(double v) { return Eigen::MatrixXd::Constant(1, 1, v); }

void expect_valid_design(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                         const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                         const LqrDesign<double>& d) {
  EXPECT_LE(dare_residual(A, B, Q, R, d.P) / std::max(1.0, d.P.cwiseAbs().maxCoeff()), 1e-9);
  EXPECT_LT(spectral_radius<double>(A + B * d.K), 1.0);
  EXPECT_LE((d.P - d.P.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.P);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-12);
}

TEST(SolveDare, CaseStudy) {
  const auto d = testing::case_lqr();
  EXPECT_NEAR(d.K(0, 0), -0.6167, 5e-4);
  EXPECT_NEAR(d.K(0, 1), -1.2703, 5e-4);
  EXPECT_NEAR(d.P(0, 0), 2.0599, 5e-4);
  EXPECT_NEAR(d.P(0, 1), 0.5916, 5e-4);
  EXPECT_NEAR(d.P(1, 0), 0.5916, 5e-4);
  EXPECT_NEAR(d.P(1, 1), 1.4228, 5e-4);
  expect_valid_design(testing::case_A(), testing::case_B(), Eigen::MatrixXd::Identity(2, 2),
                      scalar(0.1), d);
}

TEST(SolveDare, ScalarZeroDynamics) {
  const auto d = solve_dare<double>(scalar(0), scalar(1), scalar(1), scalar(1));
  EXPECT_DOUBLE_EQ(d.P(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(d.K(0, 0), 0.0);
}

TEST(SolveDare, ScalarGoldenRatio) {
  // P^2 - P - 1 = 0
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  const auto d = solve_dare<double>(scalar(1), scalar(1), scalar(1), scalar(1));
  EXPECT_NEAR(d.P(0, 0), phi, 1e-11);
  EXPECT_NEAR(d.K(0, 0), -phi / (1.0 + phi), 1e-11);
}

TEST(SolveDare, FixedPointIsStable) {
  const Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(2, 2);
  const auto d = testing::case_lqr();
  Eigen::MatrixXd P = d.P;
  for (int i = 0; i < d.iterations; ++i)
    P = riccati_map<double>(testing::case_A(), testing::case_B(), Q, scalar(0.1), P);
  EXPECT_LT((P - d.P).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SolveDare, RandomStabilizableSystems) {
  RandomStream rng({3, 0, 0, StreamPurpose::kTest});
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + trial % 4, m = 1 + trial % 2;
    const Eigen::MatrixXd A = testing::random_matrix(rng, n, n);
    const Eigen::MatrixXd B = testing::random_matrix(rng, n, m);
    const Eigen::MatrixXd L = testing::random_matrix(rng, n, n);
    const Eigen::MatrixXd Q = L * L.transpose() + 0.1 * Eigen::MatrixXd::Identity(n, n);
    const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(m, m);
    const auto d = solve_dare<double>(A, B, Q, R);
    expect_valid_design(A, B, Q, R, d);
  }
}

TEST(SolveDare, NonConvergenceCarriesResidual) {
  // Unstabilizable: unstable mode with no input authority.
  const Eigen::MatrixXd A = (Eigen::MatrixXd(2, 2) << 2, 0, 0, 0.5).finished();
  const Eigen::MatrixXd B = (Eigen::MatrixXd(2, 1) << 0, 1).finished();
  try {
    solve_dare<double>(A, B, Eigen::MatrixXd::Identity(2, 2), scalar(1), {1e-12, 200});
    FAIL() << "expected NonConvergent";
  } catch (const NonConvergent& e) {
    EXPECT_GT(e.last_residual(), 1.0);
  }
}

TEST(SolveDare, RejectsIndefiniteR) {
  EXPECT_THROW(solve_dare<double>(scalar(1), scalar(1), scalar(1), scalar(-1)),
               std::invalid_argument);
}

}  // namespace
}  // namespace mwsmpc
