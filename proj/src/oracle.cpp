#include "mwsmpc/oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mwsmpc::oracle {

namespace {

void validate_kernel(const Eigen::MatrixXd& p, int n_states, const std::string& where) {
  if (p.rows() != n_states || p.cols() != n_states)
    throw std::invalid_argument(where + ": kernel must be n_states x n_states");
  if ((p.array() < 0.0).any()) throw std::invalid_argument(where + ": negative probability");
  for (int s = 0; s < n_states; ++s)
    if (std::abs(p.row(s).sum() - 1.0) > 1e-12)
      throw std::invalid_argument(where + ": row " + std::to_string(s) + " does not sum to 1");
}

void validate_common(int n_states, int horizon, const std::vector<bool>& safe) {
  if (n_states < 1 || n_states > kMaxStates)
    throw std::invalid_argument("chain must have 1.." + std::to_string(kMaxStates) + " states");
  if (horizon < 1 || horizon > kMaxHorizon)
    throw std::invalid_argument("horizon must lie in 1.." + std::to_string(kMaxHorizon));
  if (safe.size() != static_cast<std::size_t>(n_states))
    throw std::invalid_argument("safe mask must have one entry per state");
}

void check_state(const DiscreteChain& chain, int s) {
  if (s < 0 || s >= chain.n_states) throw std::out_of_range("state index out of range");
}

Eigen::MatrixXd random_kernel(RandomStream& rng, int n) {
  Eigen::MatrixXd p(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p(i, j) = rng.uniform() < 1.0 / 3.0 ? 0.0 : rng.uniform();
    const int keep = static_cast<int>(rng.uniform() * n);
    p(i, keep) += 0.05;
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

}  // namespace

void DiscreteChain::validate() const {
  validate_common(n_states, horizon, safe_mask);
  if (transition.size() != static_cast<std::size_t>(horizon))
    throw std::invalid_argument("need one kernel per step");
  for (int t = 0; t < horizon; ++t) validate_kernel(transition[t], n_states, "step " + std::to_string(t));
}

void PolicySwitchChain::validate() const {
  validate_common(n_states, horizon, safe_mask);
  if (policies.size() != static_cast<std::size_t>(horizon))
    throw std::invalid_argument("need one policy per step");
  for (int k = 0; k < horizon; ++k) {
    if (policies[k].size() != static_cast<std::size_t>(horizon - k))
      throw std::invalid_argument("policy " + std::to_string(k) + " must cover steps k..N-1");
    for (const auto& p : policies[k]) validate_kernel(p, n_states, "policy " + std::to_string(k));
  }
}

DiscreteChain PolicySwitchChain::closed_loop() const {
  DiscreteChain c{n_states, horizon, {}, safe_mask};
  for (int t = 0; t < horizon; ++t) c.transition.push_back(policies[t][0]);
  return c;
}

DiscreteChain PolicySwitchChain::following(int k) const {
  DiscreteChain c{n_states, horizon, {}, safe_mask};
  for (int t = 0; t < horizon; ++t)
    c.transition.push_back(t < k ? policies[t][0] : policies[k][t - k]);
  return c;
}

Eigen::VectorXd remaining_mwps(const DiscreteChain& chain, int from_step) {
  chain.validate();
  if (from_step < 0 || from_step > chain.horizon) throw std::out_of_range("step out of range");
  Eigen::VectorXd safe(chain.n_states);
  for (int s = 0; s < chain.n_states; ++s) safe(s) = chain.safe_mask[s] ? 1.0 : 0.0;
  Eigen::VectorXd v = Eigen::VectorXd::Ones(chain.n_states);
  for (int t = chain.horizon - 1; t >= from_step; --t)
    v = chain.transition[t] * safe.cwiseProduct(v);
  return v;
}

double exact_mwps(const DiscreteChain& chain, int s0, int from_step) {
  check_state(chain, s0);
  return remaining_mwps(chain, from_step)(s0);
}

Lemma1Check check_lemma1(const DiscreteChain& chain, int s0, int k) {
  chain.validate();
  check_state(chain, s0);
  if (k < 1 || k > chain.horizon - 1) throw std::out_of_range("k must lie in 1..N-1");

  Lemma1Check out;
  out.lhs = exact_mwps(chain, s0, 0);
  const Eigen::VectorXd tail = remaining_mwps(chain, k);

  std::vector<int> safe_states;
  for (int s = 0; s < chain.n_states; ++s)
    if (chain.safe_mask[s]) safe_states.push_back(s);
  if (safe_states.empty()) return out;

  // Odometer over safe prefixes (s_1, ..., s_k).
  const auto base = safe_states.size();
  std::vector<std::size_t> digits(k, 0);
  double rhs = 0.0;
  while (true) {
    double prob = 1.0;
    int prev = s0;
    for (int t = 0; t < k && prob != 0.0; ++t) {
      const int s = safe_states[digits[t]];
      prob *= chain.transition[t](prev, s);
      prev = s;
    }
    rhs += prob * tail(prev);
    int pos = k - 1;
    while (pos >= 0 && ++digits[pos] == base) digits[pos--] = 0;
    if (pos < 0) break;
  }
  out.rhs = rhs;
  return out;
}

Prop1Check check_prop1(const PolicySwitchChain& chain, const std::vector<double>& gammas, int s0) {
  chain.validate();
  if (s0 < 0 || s0 >= chain.n_states) throw std::out_of_range("state index out of range");
  if (gammas.size() != static_cast<std::size_t>(chain.horizon - 1))
    throw std::invalid_argument("expected N-1 gammas");

  for (int k = 1; k < chain.horizon; ++k) {
    const double g = gammas[k - 1];
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gammas must lie in (0, 1]");
    const Eigen::VectorXd updated = remaining_mwps(chain.following(k), k);
    const Eigen::VectorXd previous = remaining_mwps(chain.following(k - 1), k);
    for (int s = 0; s < chain.n_states; ++s) {
      if (chain.safe_mask[s] && updated(s) < g * previous(s) - 1e-12)
        throw std::logic_error("policy " + std::to_string(k) +
                               " violates the discounted constraint at state " +
                               std::to_string(s));
    }
  }

  Prop1Check out;
  out.initial_mwps = exact_mwps(chain.following(0), s0, 0);
  out.mwps = exact_mwps(chain.closed_loop(), s0, 0);
  out.bound = out.initial_mwps;
  for (double g : gammas) out.bound *= g;
  return out;
}

BooleCheck check_boole(const DiscreteChain& chain, int s0) {
  chain.validate();
  check_state(chain, s0);
  BooleCheck out;
  out.mwps = exact_mwps(chain, s0, 0);
  Eigen::RowVectorXd dist = Eigen::RowVectorXd::Zero(chain.n_states);
  dist(s0) = 1.0;
  double sum = 0.0;
  for (int t = 0; t < chain.horizon; ++t) {
    dist = dist * chain.transition[t];
    double safe = 0.0;
    for (int s = 0; s < chain.n_states; ++s)
      if (chain.safe_mask[s]) safe += dist(s);
    out.stage_probs.push_back(safe);
    sum += safe;
  }
  out.boole_lower = 1.0 - chain.horizon + sum;
  return out;
}

DiscreteChain random_chain(RandomStream& rng, int n_states, int horizon) {
  DiscreteChain c;
  c.n_states = n_states;
  c.horizon = horizon;
  c.safe_mask.resize(n_states);
  bool any_safe = false;
  for (int s = 0; s < n_states; ++s) {
    c.safe_mask[s] = rng.uniform() < 0.7;
    any_safe = any_safe || c.safe_mask[s];
  }
  if (!any_safe) c.safe_mask[0] = true;
  for (int t = 0; t < horizon; ++t) c.transition.push_back(random_kernel(rng, n_states));
  c.validate();
  return c;
}

PolicySwitchChain random_policy_switch_chain(RandomStream& rng, int n_states, int horizon,
                                             const std::vector<double>& gammas) {
  if (gammas.size() != static_cast<std::size_t>(horizon - 1))
    throw std::invalid_argument("expected N-1 gammas");
  const DiscreteChain first = random_chain(rng, n_states, horizon);
  PolicySwitchChain chain;
  chain.n_states = n_states;
  chain.horizon = horizon;
  chain.safe_mask = first.safe_mask;
  chain.policies.push_back(first.transition);

  for (int k = 1; k < horizon; ++k) {
    const auto& prev = chain.policies[k - 1];
    std::vector<Eigen::MatrixXd> prev_tail(prev.begin() + 1, prev.end());
    chain.policies.push_back(prev_tail);
    const Eigen::VectorXd baseline = remaining_mwps(chain.following(k), k);

    for (int attempt = 0; attempt < 4; ++attempt) {
      const double mix = attempt == 0 ? 0.0 : rng.uniform();
      std::vector<Eigen::MatrixXd> candidate;
      for (const auto& p : prev_tail)
        candidate.push_back(mix * p + (1.0 - mix) * random_kernel(rng, n_states));
      chain.policies[k] = candidate;
      const Eigen::VectorXd value = remaining_mwps(chain.following(k), k);
      bool ok = true;
      for (int s = 0; s < n_states && ok; ++s)
        ok = !chain.safe_mask[s] || value(s) >= gammas[k - 1] * baseline(s);
      if (ok) break;
      chain.policies[k] = prev_tail;
    }
  }
  chain.validate();
  return chain;
}

PolicySwitchChain leaky_policy_switch_chain(const DiscreteChain& base,
                                            const std::vector<double>& gammas) {
  base.validate();
  if (gammas.size() != static_cast<std::size_t>(base.horizon - 1))
    throw std::invalid_argument("expected N-1 gammas");
  const int n = base.n_states + 1;
  const int sink = base.n_states;
  if (n > kMaxStates) throw std::invalid_argument("no room for the absorbing unsafe state");

  PolicySwitchChain chain;
  chain.n_states = n;
  chain.horizon = base.horizon;
  chain.safe_mask = base.safe_mask;
  chain.safe_mask.push_back(false);

  std::vector<Eigen::MatrixXd> first;
  for (const auto& p : base.transition) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    q.topLeftCorner(base.n_states, base.n_states) = p;
    q(sink, sink) = 1.0;
    first.push_back(q);
  }
  chain.policies.push_back(first);
  for (int k = 1; k < base.horizon; ++k) {
    std::vector<Eigen::MatrixXd> next(chain.policies[k - 1].begin() + 1, chain.policies[k - 1].end());
    const double g = gammas[k - 1];
    Eigen::MatrixXd& step = next.front();
    step *= g;
    step.col(sink).array() += 1.0 - g;
    chain.policies.push_back(next);
  }
  chain.validate();
  return chain;
}

}  // namespace mwsmpc::oracle
