#pragma once

#include "mwsmpc/model.hpp"
#include "mwsmpc/rng.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace mwsmpc {

/**
 * Policy sequence from base_step to the mission end N:
 * u_t = u_bar_t + K (s_t - s_bar_t) for t in [base_step, N-1].
 *
 * u_bar holds one column per step (m x h); s_bar holds the nominal states
 * s_bar_{base..N} (n x (h+1)).
 */
struct AffinePolicy {
  int base_step = 0;
  Eigen::MatrixXd u_bar;
  Eigen::MatrixXd k_gain;
  Eigen::MatrixXd s_bar;

  int end_step() const { return base_step + static_cast<int>(u_bar.cols()); }
  Eigen::VectorXd evaluate(int t, const Eigen::VectorXd& s) const;
  /// Same policy, dropping the steps before k.
  AffinePolicy tail_from(int k) const;
};

/// Builds the policy whose nominal trajectory starts at s_start.
AffinePolicy make_policy(const LinearSystem<double>& sys, int base_step,
                         const Eigen::VectorXd& s_start, Eigen::MatrixXd u_bar,
                         Eigen::MatrixXd k_gain);

struct MwpsEstimate {
  double p_hat = 0.0;
  std::int64_t n_samples = 0;
  std::int64_t n_safe = 0;
  // One-sided 99% Clopper-Pearson lower bound.
  double lower_conf = 0.0;
};

double clopper_pearson_lower(std::int64_t successes, std::int64_t trials, double confidence);

/**
 * Monte Carlo estimate of P[s_{k+1..N} in S | s_k, policy].
 *
 * All n_samples rollouts advance together as the columns of one state
 * matrix, so each step is a handful of dense products.
 */
MwpsEstimate estimate_remaining_mwps(const LinearSystem<double>& sys,
                                     const Polytope<double>& poly, const AffinePolicy& policy,
                                     int k, const Eigen::VectorXd& s_k, std::int64_t n_samples,
                                     RandomStream& rng);

/// min(gamma_k * p, cap) with p the plug-in estimate or its lower bound.
double compute_sk(double gamma_k, const MwpsEstimate& estimate, double cap,
                  bool use_lower_conf = false);

/// Stage-wise level that certifies mission level s_target through Boole's inequality.
double stage_bound(int n_mission, double s_target);

std::vector<std::vector<double>> swps_surface(const std::vector<int>& n_values,
                                              const std::vector<double>& s_values);

/// Header `N,S,bound`, one row per cell, 6 decimals.
void write_surface_csv(std::ostream& os, const std::vector<int>& n_values,
                       const std::vector<double>& s_values);

}  // namespace mwsmpc
