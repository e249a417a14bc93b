#pragma once

#include "mwsmpc/lqr.hpp"
#include "mwsmpc/model.hpp"
#include "mwsmpc/rng.hpp"

#include <Eigen/Dense>

namespace mwsmpc::testing {

inline Eigen::MatrixXd case_A() { return (Eigen::MatrixXd(2, 2) << 1, 1, 0, 1).finished(); }
inline Eigen::MatrixXd case_B() { return (Eigen::MatrixXd(2, 1) << 0.5, 1).finished(); }
inline Eigen::MatrixXd case_C() {
  return (Eigen::MatrixXd(4, 2) << 1, 0, 0, 1, -1, 0, 0, -1).finished();
}
inline Eigen::VectorXd case_c() { return (Eigen::VectorXd(4) << -2, -2, -10, -2).finished(); }
inline Eigen::MatrixXd case_K() { return (Eigen::MatrixXd(1, 2) << -0.6167, -1.2703).finished(); }

inline LinearSystem<double> case_system(double noise_var = 0.04) {
  return {case_A(), case_B(), noise_var * Eigen::MatrixXd::Identity(2, 2)};
}
inline Polytope<double> case_polytope() { return {case_C(), case_c()}; }

inline LqrDesign<double> case_lqr() {
  return solve_dare<double>(case_A(), case_B(), Eigen::MatrixXd::Identity(2, 2),
                            Eigen::MatrixXd::Constant(1, 1, 0.1));
}

/// Random system with spectral radius of A below 1.
inline LinearSystem<double> random_stable_system(RandomStream& rng, int n, int m) {
  Eigen::MatrixXd A(n, n), B(n, m), L(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = rng.normal(), L(i, j) = rng.normal();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) B(i, j) = rng.normal();
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  A *= 0.9 / std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
  return {A, B, 0.01 * L * L.transpose()};
}

inline Eigen::MatrixXd random_matrix(RandomStream& rng, Eigen::Index r, Eigen::Index c) {
  Eigen::MatrixXd out(r, c);
  rng.fill_normal(out);
  return out;
}

}  // namespace mwsmpc::testing
