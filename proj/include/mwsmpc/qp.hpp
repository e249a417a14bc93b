#pragma once

#include "mwsmpc/model.hpp"
#include "mwsmpc/scenario.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <limits>
#include <string_view>
#include <vector>

namespace mwsmpc {

/// min 1/2 x'Hx + lin'x + offset  s.t.  g_ineq x + h_ineq <= 0
template <typename Scalar>
struct QpProblem {
  Mat<Scalar> hess;
  Vec<Scalar> lin;
  Mat<Scalar> g_ineq;
  Vec<Scalar> h_ineq;
  // Constant part of the cost; does not affect the minimizer.
  Scalar offset = 0;

  Eigen::Index n_vars() const { return hess.rows(); }
  Eigen::Index n_constraints() const { return g_ineq.rows(); }
  Scalar objective(const Vec<Scalar>& x) const {
    return Scalar(0.5) * x.dot(hess * x) + lin.dot(x) + offset;
  }
};

enum class QpStatus { kOptimal, kInfeasible, kMaxIter };

constexpr std::string_view to_string(QpStatus s) {
  switch (s) {
    case QpStatus::kOptimal: return "optimal";
    case QpStatus::kInfeasible: return "infeasible";
    case QpStatus::kMaxIter: return "max_iter";
  }
  return "unknown";
}

template <typename Scalar>
struct QpSolution {
  Vec<Scalar> x;
  Vec<Scalar> duals;
  QpStatus status = QpStatus::kMaxIter;
  Scalar kkt_stationarity = 0;
  Scalar kkt_complementarity = 0;
  Scalar primal_violation = 0;
  int iterations = 0;
  std::vector<Eigen::Index> active_set;
};

struct QpOptions {
  int max_iterations = 10000;
  // Smallest Hessian eigenvalue enforced by a diagonal shift.
  double hessian_floor = 1e-10;
  // Constraints violated by less than this count as satisfied.
  double feasibility_tol = 1e-9;
};

/**
 * Condenses the shrinking-horizon problem at state s_k into a QP over the
 * stacked nominal inputs u_bar_{k..N-1} (d = m h).
 *
 * Cost: sum_t (s'Q s + u'R u) over t = k..N-1 plus s_N' Q_N s_N, with
 * s = phi s_k + gamma u. The s_k-only terms land in `offset`. Constraints:
 * i_max + c_blk (phi s_k + gamma u) <= 0.
 */
template <typename Scalar>
QpProblem<Scalar> assemble_qp(const LinearSystem<Scalar>& sys, const MatArg<Scalar>& q_cost,
                              const MatArg<Scalar>& r_cost, const MatArg<Scalar>& q_term,
                              const StackedPrediction<Scalar>& pred, const VecArg<Scalar>& s_k,
                              const ReducedConstraints<Scalar>& red) {
  const Eigen::Index n = sys.n(), m = sys.m();
  const int h = pred.horizon;
  detail::require_shape(q_cost.rows() == n && q_cost.cols() == n, "Q must be n x n");
  detail::require_shape(q_term.rows() == n && q_term.cols() == n, "Q_N must be n x n");
  detail::require_shape(r_cost.rows() == m && r_cost.cols() == m, "R must be m x m");
  detail::require_shape(s_k.size() == n, "state has wrong dimension");
  detail::require_shape(pred.phi.rows() == h * n && pred.gamma.cols() == h * m,
                        "prediction does not match the system");
  detail::require_shape(red.i_max.size() == pred.c_blk.rows(),
                        "reduced constraints do not match the prediction");

  Mat<Scalar> q_bar = Mat<Scalar>::Zero(h * n, h * n);
  for (int j = 0; j + 1 < h; ++j) q_bar.block(j * n, j * n, n, n) = q_cost;
  q_bar.block((h - 1) * n, (h - 1) * n, n, n) = q_term;

  const Vec<Scalar> free_resp = pred.phi * s_k;
  const Mat<Scalar> qg = q_bar * pred.gamma;

  QpProblem<Scalar> prob;
  prob.hess = Scalar(2) * (pred.gamma.transpose() * qg);
  for (int j = 0; j < h; ++j) prob.hess.block(j * m, j * m, m, m) += Scalar(2) * r_cost;
  prob.hess = Scalar(0.5) * (prob.hess + prob.hess.transpose()).eval();
  prob.lin = Scalar(2) * (qg.transpose() * free_resp);
  prob.offset = s_k.dot(q_cost * s_k) + free_resp.dot(q_bar * free_resp);
  prob.g_ineq = pred.c_blk * pred.gamma;
  prob.h_ineq = red.i_max + pred.c_blk * free_resp;
  return prob;
}

/**
 * Dense strictly convex QP by the Goldfarb-Idnani dual active-set method.
 *
 * Iterates live in whitened coordinates y = L'x (H = LL'), so each step
 * only needs a QR of the active constraint normals. Starting from the
 * unconstrained minimizer, the most violated constraint is added until none
 * remains. Infeasibility is certified when a violated constraint admits
 * neither a primal step nor a dual drop.
 */
template <typename Scalar>
QpSolution<Scalar> solve_qp(const QpProblem<Scalar>& prob, const QpOptions& opts = {}) {
  using MatS = Mat<Scalar>;
  using VecS = Vec<Scalar>;
  const Eigen::Index d = prob.n_vars(), p = prob.n_constraints();
  detail::require_shape(prob.hess.cols() == d && prob.lin.size() == d, "QP cost shape mismatch");
  detail::require_shape(prob.g_ineq.cols() == d || p == 0, "QP constraint shape mismatch");
  detail::require_shape(prob.h_ineq.size() == p, "QP constraint offset shape mismatch");
  constexpr Scalar kInf = std::numeric_limits<Scalar>::infinity();

  MatS hess = Scalar(0.5) * (prob.hess + prob.hess.transpose());
  {
    Eigen::SelfAdjointEigenSolver<MatS> eig(hess, Eigen::EigenvaluesOnly);
    const Scalar lo = eig.eigenvalues().minCoeff();
    if (lo < Scalar(opts.hessian_floor))
      hess.diagonal().array() += Scalar(opts.hessian_floor) - lo;
  }
  const Eigen::LLT<MatS> llt(hess);
  const MatS lower = llt.matrixL();
  const auto tri = lower.template triangularView<Eigen::Lower>();

  // Constraint i reads m_i'y >= h_i with m_i = L^-1 (-g_i).
  const MatS normals = p > 0 ? MatS(tri.solve(-prob.g_ineq.transpose())) : MatS(d, 0);
  VecS y = -tri.solve(prob.lin);

  std::vector<Eigen::Index> active;
  std::vector<Scalar> u;
  std::vector<char> is_active(p, 0);
  QpSolution<Scalar> sol;
  sol.status = QpStatus::kMaxIter;
  int iter = 0;

  auto slack = [&](Eigen::Index i) { return normals.col(i).dot(y) - prob.h_ineq(i); };

  while (iter < opts.max_iterations) {
    Eigen::Index pick = -1;
    Scalar worst = -Scalar(opts.feasibility_tol);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (is_active[i]) continue;
      const Scalar s = slack(i);
      if (s < worst) {
        worst = s;
        pick = i;
      }
    }
    if (pick < 0) {
      sol.status = QpStatus::kOptimal;
      break;
    }

    const VecS mp = normals.col(pick);
    Scalar u_pick = 0;
    bool added = false;
    while (!added && iter < opts.max_iterations) {
      ++iter;
      const auto q = static_cast<Eigen::Index>(active.size());
      VecS z = mp;
      VecS r(q);
      if (q > 0) {
        MatS na(d, q);
        for (Eigen::Index j = 0; j < q; ++j) na.col(j) = normals.col(active[j]);
        const Eigen::HouseholderQR<MatS> qr(na);
        const VecS v = qr.householderQ().transpose() * mp;
        r = qr.matrixQR().topLeftCorner(q, q).template triangularView<Eigen::Upper>().solve(
            v.head(q));
        VecS tail = VecS::Zero(d);
        tail.tail(d - q) = v.tail(d - q);
        z = qr.householderQ() * tail;
      }

      Scalar t1 = kInf;
      Eigen::Index drop = -1;
      const Scalar r_tol = Scalar(1e-14) * (Scalar(1) + (q > 0 ? r.cwiseAbs().maxCoeff() : 0));
      for (Eigen::Index j = 0; j < q; ++j) {
        if (r(j) > r_tol) {
          const Scalar ratio = u[j] / r(j);
          if (ratio < t1) {
            t1 = ratio;
            drop = j;
          }
        }
      }
      const Scalar z2 = z.squaredNorm();
      const Scalar t2 = z2 > Scalar(1e-20) * mp.squaredNorm() ? -slack(pick) / z2 : kInf;
      const Scalar t = std::min(t1, t2);

      if (t == kInf) {
        sol.status = QpStatus::kInfeasible;
        break;
      }
      if (t2 < kInf) y += t * z;
      for (Eigen::Index j = 0; j < q; ++j) u[j] -= t * r(j);
      u_pick += t;

      if (t2 <= t1) {
        active.push_back(pick);
        is_active[pick] = 1;
        u.push_back(u_pick);
        added = true;
      } else {
        is_active[active[drop]] = 0;
        active.erase(active.begin() + drop);
        u.erase(u.begin() + drop);
      }
    }
    if (sol.status == QpStatus::kInfeasible) break;
  }

  sol.iterations = iter;
  sol.x = lower.transpose().template triangularView<Eigen::Upper>().solve(y);
  sol.duals = VecS::Zero(p);
  for (std::size_t j = 0; j < active.size(); ++j) sol.duals(active[j]) = u[j];
  sol.active_set = active;

  const VecS resid = p > 0 ? VecS(prob.g_ineq * sol.x + prob.h_ineq) : VecS(0);
  VecS grad = prob.hess * sol.x + prob.lin;
  if (p > 0) grad += prob.g_ineq.transpose() * sol.duals;
  sol.kkt_stationarity = d > 0 ? grad.cwiseAbs().maxCoeff() : Scalar(0);
  sol.kkt_complementarity =
      p > 0 ? (sol.duals.array() * resid.array()).abs().maxCoeff() : Scalar(0);
  sol.primal_violation = p > 0 ? std::max(resid.maxCoeff(), Scalar(0)) : Scalar(0);
  return sol;
}

}  // namespace mwsmpc
