#include "mwsmpc/controller.hpp"

#include "mwsmpc/scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>

namespace mwsmpc {

double MissionSpec::certified_bound() const {
  return std::accumulate(gammas.begin(), gammas.end(), s0_bound, std::multiplies<>());
}

void MissionSpec::validate() const {
  if (n_mission < 1) throw std::invalid_argument("N must be >= 1");
  if (!(s0_bound >= 0.0 && s0_bound < 1.0)) throw std::invalid_argument("S0 must lie in [0, 1)");
  if (gammas.size() != static_cast<std::size_t>(n_mission - 1))
    throw std::invalid_argument("expected N-1 = " + std::to_string(n_mission - 1) + " gammas");
  for (double g : gammas)
    if (!(g > 0.0 && g <= 1.0)) throw std::invalid_argument("gammas must lie in (0, 1]");
  if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("beta must lie in (0, 1)");
  if (!(sk_cap > 0.0 && sk_cap < 1.0)) throw std::invalid_argument("sk_cap must lie in (0, 1)");
  if (mc_samples < 1) throw std::invalid_argument("mc_samples must be >= 1");
}

MissionContext::MissionContext(LinearSystem<double> sys, Polytope<double> poly,
                               LqrDesign<double> lqr, int n_mission)
    : sys_(std::move(sys)), poly_(std::move(poly)), lqr_(std::move(lqr)) {
  detail::require_shape(poly_.dim() == sys_.n(), "polytope dimension does not match the system");
  detail::require_shape(lqr_.P.rows() == sys_.n() && lqr_.P.cols() == sys_.n(),
                        "terminal weight must be n x n");
  if (n_mission < 1) throw std::invalid_argument("N must be >= 1");
  predictions_.reserve(n_mission);
  for (int h = 1; h <= n_mission; ++h)
    predictions_.push_back(build_stacked_prediction(sys_, lqr_.K, poly_, h));
}

const StackedPrediction<double>& MissionContext::prediction(int h) const {
  if (h < 1 || h > static_cast<int>(predictions_.size()))
    throw std::out_of_range("no prediction cached for horizon " + std::to_string(h));
  return predictions_[h - 1];
}

PlanResult plan_step(int k, const Eigen::VectorXd& s_k, const AffinePolicy* prev,
                     const MissionSpec& spec, const MissionContext& ctx,
                     std::uint64_t mission_index) {
  const int n_mission = spec.n_mission;
  if (k < 0 || k >= n_mission) throw std::out_of_range("step index outside the mission");
  if (k >= 1 && prev == nullptr) throw std::invalid_argument("a previous policy is required for k >= 1");
  const int h = n_mission - k;
  const auto k_id = static_cast<std::uint64_t>(k);

  StepDiagnostics diag;
  diag.k = k;
  if (k == 0) {
    diag.sk = spec.s0_bound;
  } else {
    RandomStream est_rng({spec.seed, mission_index, k_id, StreamPurpose::kEstimate});
    diag.estimate = estimate_remaining_mwps(ctx.sys(), ctx.poly(), *prev, k, s_k,
                                            spec.mc_samples, est_rng);
    diag.sk = compute_sk(spec.gammas[k - 1], *diag.estimate, spec.sk_cap, spec.sk_from_lower_conf);
  }

  const auto d_k = static_cast<std::int64_t>(ctx.sys().m()) * h;
  diag.nk = required_sample_count(diag.sk, spec.beta, d_k);

  RandomStream scen_rng({spec.seed, mission_index, k_id, StreamPurpose::kScenarios});
  const auto& pred = ctx.prediction(h);
  const ScenarioBatch batch = draw_scenarios(scen_rng, ctx.sys().sigma_w(), h, diag.nk);
  const auto reduced = reduce_rowmax(build_h_rows(batch.samples, pred));
  const auto prob =
      assemble_qp(ctx.sys(), spec.q_cost, spec.r_cost, ctx.lqr().P, pred, s_k, reduced);
  const auto sol = solve_qp(prob);

  diag.n_vars = prob.n_vars();
  diag.qp_status = sol.status;
  diag.kkt_stationarity = sol.kkt_stationarity;
  diag.kkt_complementarity = sol.kkt_complementarity;
  diag.primal_violation = sol.primal_violation;
  diag.min_dual = sol.duals.size() > 0 ? sol.duals.minCoeff() : 0.0;

  if (sol.status == QpStatus::kOptimal) {
    const Eigen::MatrixXd u_bar = sol.x.reshaped(ctx.sys().m(), h);
    return {make_policy(ctx.sys(), k, s_k, u_bar, ctx.lqr().K), diag};
  }
  if (k == 0)
    throw MissionConfigError(std::string("initial scenario QP is ") +
                             std::string(to_string(sol.status)) + "; no policy to fall back on");
  diag.fallback = true;
  return {prev->tail_from(k), diag};
}

MissionTrace run_mission(const MissionSpec& spec, const MissionContext& ctx,
                         const Eigen::VectorXd& s0, std::uint64_t mission_index) {
  spec.validate();
  detail::require_shape(s0.size() == ctx.sys().n(), "initial state has wrong dimension");
  if (!in_safe_set(ctx.poly(), s0)) throw MissionConfigError("initial state is outside the safe set");

  const Eigen::MatrixXd w_factor = covariance_factor(ctx.sys().sigma_w());
  RandomStream plant_rng({spec.seed, mission_index, 0, StreamPurpose::kPlant});

  MissionTrace trace;
  trace.states.push_back(s0);
  std::optional<AffinePolicy> policy;
  Eigen::VectorXd s = s0;
  Eigen::MatrixXd w(ctx.sys().n(), 1);
  for (int k = 0; k < spec.n_mission; ++k) {
    PlanResult plan = plan_step(k, s, policy ? &*policy : nullptr, spec, ctx, mission_index);
    policy = std::move(plan.policy);
    const Eigen::VectorXd u = policy->evaluate(k, s);
    plant_rng.fill_normal(w);
    s = ctx.sys().A() * s + ctx.sys().B() * u + w_factor * w.col(0);
    trace.inputs.push_back(u);
    trace.states.push_back(s);
    trace.steps.push_back(plan.diag);
    if (!trace.first_violation && !in_safe_set(ctx.poly(), s)) trace.first_violation = k + 1;
  }
  trace.success = !trace.first_violation.has_value();
  return trace;
}

BatchStats run_batch(MissionSpec spec, const MissionContext& ctx, const Eigen::VectorXd& s0,
                     std::int64_t n_missions, std::uint64_t master_seed, const BatchOptions& opts) {
  if (n_missions < 1) throw std::invalid_argument("n_missions must be >= 1");
  spec.seed = master_seed;
  spec.validate();
  const int n_steps = spec.n_mission;

  struct MissionSummary {
    bool success = false;
    std::vector<StepDiagnostics> steps;
  };
  std::vector<MissionSummary> results(n_missions);
  if (opts.trace_dir) std::filesystem::create_directories(*opts.trace_dir);

  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::int64_t i = next++; i < n_missions && !failed; i = next++) {
      try {
        MissionTrace trace = run_mission(spec, ctx, s0, static_cast<std::uint64_t>(i));
        if (opts.trace_dir) {
          std::ofstream f(*opts.trace_dir / ("mission_" + std::to_string(i) + ".csv"));
          write_trace_csv(f, trace, ctx.poly());
        }
        results[i] = {trace.success, std::move(trace.steps)};
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  unsigned workers = opts.workers ? opts.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::int64_t>(workers, n_missions));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  // Aggregate in mission order so the result does not depend on scheduling.
  BatchStats stats;
  stats.missions = n_missions;
  stats.s_certified = spec.certified_bound();
  stats.mean_sk.assign(n_steps, 0.0);
  stats.mean_nk.assign(n_steps, 0.0);
  stats.fallbacks.assign(n_steps, 0);
  for (const auto& r : results) {
    stats.successes += r.success ? 1 : 0;
    for (const auto& d : r.steps) {
      stats.mean_sk[d.k] += d.sk;
      stats.mean_nk[d.k] += static_cast<double>(d.nk);
      stats.fallbacks[d.k] += d.fallback ? 1 : 0;
      if (d.qp_status == QpStatus::kOptimal) {
        ++stats.qp_optimal;
        stats.max_stationarity = std::max(stats.max_stationarity, d.kkt_stationarity);
        stats.max_complementarity = std::max(stats.max_complementarity, d.kkt_complementarity);
        stats.max_primal_violation = std::max(stats.max_primal_violation, d.primal_violation);
        stats.min_dual = std::min(stats.min_dual, d.min_dual);
      } else {
        ++stats.qp_failed;
      }
    }
  }
  for (int k = 0; k < n_steps; ++k) {
    stats.mean_sk[k] /= static_cast<double>(n_missions);
    stats.mean_nk[k] /= static_cast<double>(n_missions);
  }
  stats.ratio = static_cast<double>(stats.successes) / static_cast<double>(n_missions);
  return stats;
}

namespace {
std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}
}  // namespace

void write_trace_csv(std::ostream& os, const MissionTrace& trace, const Polytope<double>& poly) {
  const Eigen::Index n = trace.states.empty() ? 0 : trace.states.front().size();
  const Eigen::Index m = trace.inputs.empty() ? 0 : trace.inputs.front().size();
  os << "k";
  for (Eigen::Index i = 0; i < n; ++i) os << ",s" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) os << ",u" << i + 1;
  os << ",Sk,Nk,qp_status,fallback,safe\n";
  for (std::size_t k = 0; k < trace.states.size(); ++k) {
    os << k;
    for (Eigen::Index i = 0; i < n; ++i) os << ',' << fmt_double(trace.states[k](i));
    const bool planned = k < trace.inputs.size();
    for (Eigen::Index i = 0; i < m; ++i) {
      os << ',';
      if (planned) os << fmt_double(trace.inputs[k](i));
    }
    if (planned && k < trace.steps.size()) {
      const auto& d = trace.steps[k];
      os << ',' << fmt_double(d.sk) << ',' << d.nk << ',' << to_string(d.qp_status) << ','
         << (d.fallback ? 1 : 0);
    } else {
      os << ",,,,";
    }
    os << ',' << (in_safe_set(poly, trace.states[k]) ? 1 : 0) << '\n';
  }
}

void write_summary_csv(std::ostream& os, const BatchStats& stats) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%lld,%lld,%.6f,%.6f\n", static_cast<long long>(stats.missions),
                static_cast<long long>(stats.successes), stats.ratio, stats.s_certified);
  os << "missions,successes,ratio,S_certified\n" << buf;
}

void write_steps_csv(std::ostream& os, const BatchStats& stats) {
  os << "k,mean_Sk,mean_Nk,fallbacks\n";
  char buf[128];
  for (std::size_t k = 0; k < stats.mean_sk.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%zu,%.6f,%.3f,%lld\n", k, stats.mean_sk[k], stats.mean_nk[k],
                  static_cast<long long>(stats.fallbacks[k]));
    os << buf;
  }
}

}  // namespace mwsmpc
