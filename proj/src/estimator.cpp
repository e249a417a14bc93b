#include "mwsmpc/estimator.hpp"

#include "mwsmpc/scenario.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace mwsmpc {

Eigen::VectorXd AffinePolicy::evaluate(int t, const Eigen::VectorXd& s) const {
  if (t < base_step || t >= end_step())
    throw std::out_of_range("policy has no input for step " + std::to_string(t));
  const int i = t - base_step;
  return u_bar.col(i) + k_gain * (s - s_bar.col(i));
}

AffinePolicy AffinePolicy::tail_from(int k) const {
  if (k < base_step || k >= end_step())
    throw std::out_of_range("cannot restrict policy to step " + std::to_string(k));
  const int skip = k - base_step;
  AffinePolicy out;
  out.base_step = k;
  out.u_bar = u_bar.rightCols(u_bar.cols() - skip);
  out.k_gain = k_gain;
  out.s_bar = s_bar.rightCols(s_bar.cols() - skip);
  return out;
}

AffinePolicy make_policy(const LinearSystem<double>& sys, int base_step,
                         const Eigen::VectorXd& s_start, Eigen::MatrixXd u_bar,
                         Eigen::MatrixXd k_gain) {
  detail::require_shape(u_bar.rows() == sys.m(), "u_bar must have m rows");
  detail::require_shape(k_gain.rows() == sys.m() && k_gain.cols() == sys.n(), "K must be m x n");
  detail::require_shape(s_start.size() == sys.n(), "start state has wrong dimension");
  AffinePolicy p;
  p.base_step = base_step;
  p.s_bar.resize(sys.n(), u_bar.cols() + 1);
  p.s_bar.col(0) = s_start;
  for (Eigen::Index t = 0; t < u_bar.cols(); ++t)
    p.s_bar.col(t + 1) = sys.A() * p.s_bar.col(t) + sys.B() * u_bar.col(t);
  p.u_bar = std::move(u_bar);
  p.k_gain = std::move(k_gain);
  return p;
}

double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, double confidence) {
  if (trials <= 0 || successes < 0 || successes > trials)
    throw std::invalid_argument("invalid binomial counts");
  if (successes == 0) return 0.0;
  const double a = static_cast<double>(successes);
  const double b = static_cast<double>(trials - successes + 1);
  return boost::math::ibeta_inv(a, b, 1.0 - confidence);
}

MwpsEstimate estimate_remaining_mwps(const LinearSystem<double>& sys,
                                     const Polytope<double>& poly, const AffinePolicy& policy,
                                     int k, const Eigen::VectorXd& s_k, std::int64_t n_samples,
                                     RandomStream& rng) {
  if (n_samples <= 0) throw std::invalid_argument("n_samples must be positive");
  detail::require_shape(s_k.size() == sys.n(), "state has wrong dimension");
  detail::require_shape(poly.dim() == sys.n(), "polytope dimension does not match the system");
  if (k < policy.base_step || k > policy.end_step())
    throw std::out_of_range("policy does not cover step " + std::to_string(k));

  const Eigen::Index n = sys.n();
  const Eigen::MatrixXd factor = covariance_factor(sys.sigma_w());
  const Eigen::MatrixXd a_cl = sys.A() + sys.B() * policy.k_gain;

  // One column per state coordinate, one row per rollout.
  Eigen::ArrayXXd states = s_k.transpose().replicate(n_samples, 1).array();
  Eigen::ArrayXXd next(n_samples, n);
  Eigen::MatrixXd noise(n_samples, n);
  Eigen::ArrayXd resid(n_samples);
  Eigen::Array<bool, Eigen::Dynamic, 1> alive =
      Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n_samples, true);

  for (int t = k; t < policy.end_step(); ++t) {
    const int i = t - policy.base_step;
    // A s + B (u_bar + K (s - s_bar)) = (A + BK) s + B (u_bar - K s_bar)
    const Eigen::VectorXd drift =
        sys.B() * (policy.u_bar.col(i) - policy.k_gain * policy.s_bar.col(i));
    rng.fill_normal(noise);
    for (Eigen::Index r = 0; r < n; ++r) {
      next.col(r).setConstant(drift(r));
      for (Eigen::Index c = 0; c < n; ++c) {
        if (a_cl(r, c) != 0.0) next.col(r) += a_cl(r, c) * states.col(c);
        if (factor(r, c) != 0.0) next.col(r) += factor(r, c) * noise.col(c).array();
      }
    }
    states.swap(next);
    for (Eigen::Index r = 0; r < poly.n_constraints(); ++r) {
      resid.setConstant(poly.c()(r));
      for (Eigen::Index c = 0; c < n; ++c)
        if (poly.C()(r, c) != 0.0) resid += poly.C()(r, c) * states.col(c);
      alive = alive && (resid <= 0.0);
    }
  }

  MwpsEstimate est;
  est.n_samples = n_samples;
  est.n_safe = alive.count();
  est.p_hat = static_cast<double>(est.n_safe) / static_cast<double>(n_samples);
  est.lower_conf = std::min(clopper_pearson_lower(est.n_safe, n_samples, 0.99), est.p_hat);
  return est;
}

double compute_sk(double gamma_k, const MwpsEstimate& estimate, double cap, bool use_lower_conf) {
  if (!(gamma_k > 0.0 && gamma_k <= 1.0)) throw std::invalid_argument("gamma_k must lie in (0, 1]");
  const double p = use_lower_conf ? estimate.lower_conf : estimate.p_hat;
  return std::min(gamma_k * p, cap);
}

double stage_bound(int n_mission, double s_target) {
  if (n_mission < 1) throw std::invalid_argument("mission length must be >= 1");
  if (!(s_target >= 0.0 && s_target <= 1.0))
    throw std::invalid_argument("target probability must lie in [0, 1]");
  const double n = n_mission;
  return (n - 1.0) / n + s_target / n;
}

std::vector<std::vector<double>> swps_surface(const std::vector<int>& n_values,
                                              const std::vector<double>& s_values) {
  if (n_values.empty() || s_values.empty())
    throw std::invalid_argument("surface axes must be non-empty");
  std::vector<std::vector<double>> grid(n_values.size(), std::vector<double>(s_values.size()));
  for (std::size_t i = 0; i < n_values.size(); ++i)
    for (std::size_t j = 0; j < s_values.size(); ++j)
      grid[i][j] = stage_bound(n_values[i], s_values[j]);
  return grid;
}

void write_surface_csv(std::ostream& os, const std::vector<int>& n_values,
                       const std::vector<double>& s_values) {
  const auto grid = swps_surface(n_values, s_values);
  os << "N,S,bound\n";
  char buf[96];
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    for (std::size_t j = 0; j < s_values.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%d,%.6f,%.6f\n", n_values[i], s_values[j], grid[i][j]);
      os << buf;
    }
  }
}

}  // namespace mwsmpc
