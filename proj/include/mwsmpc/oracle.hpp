#pragma once

#include "mwsmpc/rng.hpp"

#include <Eigen/Dense>

#include <vector>

namespace mwsmpc::oracle {

inline constexpr int kMaxStates = 10;
inline constexpr int kMaxHorizon = 10;

/**
 * Finite-state Markov chain over a horizon N. transition[t](s, s') is the
 * probability of moving from s at step t to s' at step t+1.
 */
struct DiscreteChain {
  int n_states = 0;
  int horizon = 0;
  std::vector<Eigen::MatrixXd> transition;
  std::vector<bool> safe_mask;

  void validate() const;
};

/**
 * Chain driven by a sequence of replanned policies. policies[k][t - k] is the
 * kernel policy k applies at step t (t = k..N-1); the closed loop applies
 * policies[t][0] at step t.
 */
struct PolicySwitchChain {
  int n_states = 0;
  int horizon = 0;
  std::vector<std::vector<Eigen::MatrixXd>> policies;
  std::vector<bool> safe_mask;

  void validate() const;
  /// Chain obtained by following policy k from step k on (earlier steps: closed loop).
  DiscreteChain closed_loop() const;
  /// Kernels of policy k extended with the closed-loop kernels before step k.
  DiscreteChain following(int k) const;
};

/// V(s) = P[s_{from+1..N} safe | s_from = s], by backward recursion.
Eigen::VectorXd remaining_mwps(const DiscreteChain& chain, int from_step);

double exact_mwps(const DiscreteChain& chain, int s0, int from_step);

struct Lemma1Check {
  double lhs = 0.0;
  double rhs = 0.0;
};

/**
 * lhs: MWPS from step 0. rhs: sum over safe prefixes s_1..s_k of
 * P(prefix) * remaining MWPS at (s_k, k), by explicit prefix enumeration.
 */
Lemma1Check check_lemma1(const DiscreteChain& chain, int s0, int k);

struct Prop1Check {
  double mwps = 0.0;
  double bound = 0.0;
  // MWPS of the initial policy, used as S_0.
  double initial_mwps = 0.0;
};

/// Throws std::logic_error when a policy update breaks the discounted constraint.
Prop1Check check_prop1(const PolicySwitchChain& chain, const std::vector<double>& gammas, int s0);

struct BooleCheck {
  double mwps = 0.0;
  double boole_lower = 0.0;
  // Marginal P[s_t safe], t = 1..N.
  std::vector<double> stage_probs;
};

BooleCheck check_boole(const DiscreteChain& chain, int s0);

/// Random kernels, roughly a third of the entries zeroed; at least one safe state.
DiscreteChain random_chain(RandomStream& rng, int n_states, int horizon);

/**
 * Random policy switches: at each step a fresh random continuation is kept if
 * it meets the discounted constraint at every safe state, otherwise the
 * previous policy's tail is reused.
 */
PolicySwitchChain random_policy_switch_chain(RandomStream& rng, int n_states, int horizon,
                                             const std::vector<double>& gammas);

/**
 * Tight construction: policy k copies policy k-1 but leaks (1 - gamma_k) of
 * the step-k mass into an absorbing unsafe state, so the discounted
 * constraint holds with equality. Appends that state to `base`.
 */
PolicySwitchChain leaky_policy_switch_chain(const DiscreteChain& base,
                                            const std::vector<double>& gammas);

}  // namespace mwsmpc::oracle
