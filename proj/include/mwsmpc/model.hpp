#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

namespace mwsmpc {

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatArg = std::type_identity_t<Mat<Scalar>>;
template <typename Scalar>
using VecArg = std::type_identity_t<Vec<Scalar>>;

/// Raised whenever operand shapes disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {
inline void require_shape(bool ok, const std::string& what) {
  if (!ok) throw DimensionError(what);
}
}  // namespace detail

/**
 * Discrete-time linear system s+ = A s + B u + w with w ~ N(0, sigma_w).
 *
 * Construction validates the shapes and that sigma_w is symmetric positive
 * semidefinite (symmetry to 1e-12, eigenvalues >= -1e-10).
 */
template <typename Scalar>
class LinearSystem {
 public:
  LinearSystem(Mat<Scalar> A, Mat<Scalar> B, Mat<Scalar> sigma_w)
      : A_(std::move(A)), B_(std::move(B)), sigma_w_(std::move(sigma_w)) {
    const auto n = A_.rows();
    detail::require_shape(n > 0 && A_.cols() == n, "A must be square and non-empty");
    detail::require_shape(B_.rows() == n && B_.cols() > 0, "B must have as many rows as A");
    detail::require_shape(sigma_w_.rows() == n && sigma_w_.cols() == n,
                          "sigma_w must be n x n");
    if ((sigma_w_ - sigma_w_.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12))
      throw std::invalid_argument("sigma_w must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> eig(sigma_w_, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < Scalar(-1e-10))
      throw std::invalid_argument("sigma_w must be positive semidefinite");
  }

  const Mat<Scalar>& A() const { return A_; }
  const Mat<Scalar>& B() const { return B_; }
  const Mat<Scalar>& sigma_w() const { return sigma_w_; }
  Eigen::Index n() const { return A_.rows(); }
  Eigen::Index m() const { return B_.cols(); }

 private:
  Mat<Scalar> A_;
  Mat<Scalar> B_;
  Mat<Scalar> sigma_w_;
};

/// Safe set {s | C s + c <= 0}. Boundary points are inside.
template <typename Scalar>
class Polytope {
 public:
  Polytope(Mat<Scalar> C, Vec<Scalar> c) : C_(std::move(C)), c_(std::move(c)) {
    detail::require_shape(C_.rows() > 0 && C_.cols() > 0, "C must be non-empty");
    detail::require_shape(c_.size() == C_.rows(), "c must have one entry per row of C");
    for (Eigen::Index i = 0; i < C_.rows(); ++i) {
      if ((C_.row(i).array() == Scalar(0)).all())
        throw std::invalid_argument("C has an all-zero row " + std::to_string(i));
    }
  }

  const Mat<Scalar>& C() const { return C_; }
  const Vec<Scalar>& c() const { return c_; }
  Eigen::Index n_constraints() const { return C_.rows(); }
  Eigen::Index dim() const { return C_.cols(); }

 private:
  Mat<Scalar> C_;
  Vec<Scalar> c_;
};

/**
 * Condensed prediction over h steps.
 *
 * Stacked nominal states s_{k+1..k+h} = phi s_k + gamma u_bar, stacked errors
 * e_{k+1..k+h} = a_err w_{k..k+h-1}, and stacked constraints
 * c_blk x + c_stack <= 0.
 */
template <typename Scalar>
struct StackedPrediction {
  Mat<Scalar> phi;
  Mat<Scalar> gamma;
  Mat<Scalar> a_err;
  Mat<Scalar> c_blk;
  Vec<Scalar> c_stack;
  int horizon = 0;
};

template <typename Scalar, typename Derived>
bool in_safe_set(const Polytope<Scalar>& poly, const Eigen::MatrixBase<Derived>& s) {
  detail::require_shape(s.size() == poly.dim(), "state dimension does not match the polytope");
  return ((poly.C() * s + poly.c()).array() <= Scalar(0)).all();
}

template <typename Scalar>
Mat<Scalar> closed_loop_matrix(const LinearSystem<Scalar>& sys, const MatArg<Scalar>& K) {
  detail::require_shape(K.rows() == sys.m() && K.cols() == sys.n(), "K must be m x n");
  return sys.A() + sys.B() * K;
}

/// Returns s_{k+1..k+h}, one state per entry, under w = 0.
template <typename Scalar>
std::vector<Vec<Scalar>> nominal_rollout(const LinearSystem<Scalar>& sys, const VecArg<Scalar>& s_k,
                                         const std::vector<Vec<Scalar>>& u_bar) {
  detail::require_shape(s_k.size() == sys.n(), "initial state has wrong dimension");
  std::vector<Vec<Scalar>> out;
  out.reserve(u_bar.size());
  Vec<Scalar> s = s_k;
  for (const auto& u : u_bar) {
    detail::require_shape(u.size() == sys.m(), "input has wrong dimension");
    s = sys.A() * s + sys.B() * u;
    out.push_back(s);
  }
  return out;
}

template <typename Scalar>
StackedPrediction<Scalar> build_stacked_prediction(const LinearSystem<Scalar>& sys,
                                                   const MatArg<Scalar>& K,
                                                   const Polytope<Scalar>& poly, int h) {
  if (h < 1) throw std::invalid_argument("prediction horizon must be >= 1");
  detail::require_shape(poly.dim() == sys.n(), "polytope dimension does not match the system");
  const Eigen::Index n = sys.n(), m = sys.m(), nc = poly.n_constraints();
  const Mat<Scalar> a_cl = closed_loop_matrix(sys, K);

  // powers[p] = A^p, cl_powers[p] = (A+BK)^p
  std::vector<Mat<Scalar>> powers(h + 1), cl_powers(h);
  powers[0] = Mat<Scalar>::Identity(n, n);
  for (int p = 1; p <= h; ++p) powers[p] = sys.A() * powers[p - 1];
  cl_powers[0] = Mat<Scalar>::Identity(n, n);
  for (int p = 1; p < h; ++p) cl_powers[p] = a_cl * cl_powers[p - 1];

  StackedPrediction<Scalar> pred;
  pred.horizon = h;
  pred.phi.resize(h * n, n);
  pred.gamma = Mat<Scalar>::Zero(h * n, h * m);
  pred.a_err = Mat<Scalar>::Zero(h * n, h * n);
  pred.c_blk = Mat<Scalar>::Zero(h * nc, h * n);
  pred.c_stack.resize(h * nc);
  for (int j = 0; j < h; ++j) {
    pred.phi.block(j * n, 0, n, n) = powers[j + 1];
    for (int i = 0; i <= j; ++i) {
      pred.gamma.block(j * n, i * m, n, m) = powers[j - i] * sys.B();
      pred.a_err.block(j * n, i * n, n, n) = cl_powers[j - i];
    }
    pred.c_blk.block(j * nc, j * n, nc, n) = poly.C();
    pred.c_stack.segment(j * nc, nc) = poly.c();
  }
  return pred;
}

}  // namespace mwsmpc
