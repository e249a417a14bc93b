#pragma once

#include "mwsmpc/model.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <stdexcept>
#include <string>

namespace mwsmpc {

/// Infinite-horizon LQR design: u = K e, P used as terminal weight.
template <typename Scalar>
struct LqrDesign {
  Mat<Scalar> K;
  Mat<Scalar> P;
  int iterations = 0;
};

class NonConvergent : public std::runtime_error {
 public:
  NonConvergent(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}
  double last_residual() const { return last_residual_; }

 private:
  double last_residual_;
};

struct DareOptions {
  double tolerance = 1e-12;
  int max_iterations = 100000;
};

/// One Riccati map Q + A'PA - A'PB (R + B'PB)^-1 B'PA.
template <typename Scalar>
Mat<Scalar> riccati_map(const Mat<Scalar>& A, const Mat<Scalar>& B, const Mat<Scalar>& Q,
                        const Mat<Scalar>& R, const Mat<Scalar>& P) {
  const Mat<Scalar> BtPA = B.transpose() * P * A;
  const Mat<Scalar> S = R + B.transpose() * P * B;
  Mat<Scalar> next = Q + A.transpose() * P * A - BtPA.transpose() * S.llt().solve(BtPA);
  return Scalar(0.5) * (next + next.transpose());
}

/**
 * Solves the discrete algebraic Riccati equation by value iteration from
 * P0 = Q until successive iterates differ by at most `tolerance` (max norm,
 * relative once entries of P exceed 1).
 *
 * The returned gain is already negated, K = -(R + B'PB)^-1 B'PA.
 */
template <typename Scalar>
LqrDesign<Scalar> solve_dare(const Mat<Scalar>& A, const Mat<Scalar>& B, const Mat<Scalar>& Q,
                             const Mat<Scalar>& R, const DareOptions& opts = {}) {
  const auto n = A.rows(), m = B.cols();
  detail::require_shape(A.cols() == n && B.rows() == n, "A must be n x n and B n x m");
  detail::require_shape(Q.rows() == n && Q.cols() == n, "Q must be n x n");
  detail::require_shape(R.rows() == m && R.cols() == m, "R must be m x m");
  if (Eigen::LLT<Mat<Scalar>>(R).info() != Eigen::Success)
    throw std::invalid_argument("R must be positive definite");

  Mat<Scalar> P = Q;
  Scalar residual = 0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Mat<Scalar> next = riccati_map(A, B, Q, R, P);
    residual = (next - P).cwiseAbs().maxCoeff();
    P = std::move(next);
    if (!(residual == residual))
      throw NonConvergent("Riccati iteration produced NaN", static_cast<double>(residual));
    if (residual <= Scalar(opts.tolerance) * std::max(Scalar(1), P.cwiseAbs().maxCoeff())) {
      const Mat<Scalar> S = R + B.transpose() * P * B;
      LqrDesign<Scalar> out;
      out.K = -S.llt().solve(B.transpose() * P * A);
      out.P = P;
      out.iterations = it;
      return out;
    }
  }
  throw NonConvergent("Riccati iteration did not converge in " +
                          std::to_string(opts.max_iterations) + " iterations",
                      static_cast<double>(residual));
}

template <typename Scalar>
Scalar dare_residual(const Mat<Scalar>& A, const Mat<Scalar>& B, const Mat<Scalar>& Q,
                     const Mat<Scalar>& R, const Mat<Scalar>& P) {
  return (P - riccati_map(A, B, Q, R, P)).cwiseAbs().maxCoeff();
}

template <typename Scalar>
Scalar spectral_radius(const Mat<Scalar>& M) {
  Eigen::EigenSolver<Mat<Scalar>> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace mwsmpc
