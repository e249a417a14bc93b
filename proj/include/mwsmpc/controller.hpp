#pragma once

#include "mwsmpc/estimator.hpp"
#include "mwsmpc/lqr.hpp"
#include "mwsmpc/model.hpp"
#include "mwsmpc/qp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace mwsmpc {

/// Raised when a mission cannot start, e.g. the first QP is infeasible.
class MissionConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct MissionSpec {
  int n_mission = 1;
  double s0_bound = 0.0;
  // gamma_1 .. gamma_{N-1}
  std::vector<double> gammas;
  double beta = 1e-6;
  Eigen::MatrixXd q_cost;
  Eigen::MatrixXd r_cost;
  double sk_cap = 0.995;
  std::int64_t mc_samples = 10000;
  std::uint64_t seed = 0;
  bool sk_from_lower_conf = false;

  /// prod(gammas) * S_0
  double certified_bound() const;
  void validate() const;
};

/// Everything a mission needs besides the spec; immutable and shareable.
class MissionContext {
 public:
  MissionContext(LinearSystem<double> sys, Polytope<double> poly, LqrDesign<double> lqr,
                 int n_mission);

  const LinearSystem<double>& sys() const { return sys_; }
  const Polytope<double>& poly() const { return poly_; }
  const LqrDesign<double>& lqr() const { return lqr_; }
  /// Condensed prediction for horizon h (1 <= h <= N).
  const StackedPrediction<double>& prediction(int h) const;

 private:
  LinearSystem<double> sys_;
  Polytope<double> poly_;
  LqrDesign<double> lqr_;
  std::vector<StackedPrediction<double>> predictions_;
};

struct StepDiagnostics {
  int k = 0;
  double sk = 0.0;
  std::optional<MwpsEstimate> estimate;
  std::int64_t nk = 0;
  Eigen::Index n_vars = 0;
  QpStatus qp_status = QpStatus::kOptimal;
  bool fallback = false;
  double kkt_stationarity = 0.0;
  double kkt_complementarity = 0.0;
  double primal_violation = 0.0;
  double min_dual = 0.0;
};

struct PlanResult {
  AffinePolicy policy;
  StepDiagnostics diag;
};

/**
 * One planning step at time k from the measured state s_k.
 *
 * Sets S_k (S_0 at k = 0, otherwise the discounted Monte Carlo estimate under
 * prev), draws N_k scenarios, reduces them and solves the condensed QP. If the
 * QP is not solved to optimality the previous policy's tail is returned with
 * the fallback flag set.
 */
PlanResult plan_step(int k, const Eigen::VectorXd& s_k, const AffinePolicy* prev,
                     const MissionSpec& spec, const MissionContext& ctx,
                     std::uint64_t mission_index);

struct MissionTrace {
  // s_0 .. s_N
  std::vector<Eigen::VectorXd> states;
  // u_0 .. u_{N-1}
  std::vector<Eigen::VectorXd> inputs;
  std::vector<StepDiagnostics> steps;
  bool success = false;
  std::optional<int> first_violation;
};

MissionTrace run_mission(const MissionSpec& spec, const MissionContext& ctx,
                         const Eigen::VectorXd& s0, std::uint64_t mission_index = 0);

struct BatchOptions {
  // 0 selects std::thread::hardware_concurrency().
  unsigned workers = 0;
  std::optional<std::filesystem::path> trace_dir;
};

struct BatchStats {
  std::int64_t missions = 0;
  std::int64_t successes = 0;
  double ratio = 0.0;
  double s_certified = 0.0;
  // Indexed by k = 0..N-1.
  std::vector<double> mean_sk;
  std::vector<double> mean_nk;
  std::vector<std::int64_t> fallbacks;
  std::int64_t qp_optimal = 0;
  std::int64_t qp_failed = 0;
  // Worst KKT residuals over every optimal solve.
  double max_stationarity = 0.0;
  double max_complementarity = 0.0;
  double max_primal_violation = 0.0;
  double min_dual = 0.0;
};

/// Mission i uses spec.seed = master_seed and mission index i for all its streams.
BatchStats run_batch(MissionSpec spec, const MissionContext& ctx, const Eigen::VectorXd& s0,
                     std::int64_t n_missions, std::uint64_t master_seed,
                     const BatchOptions& opts = {});

/// Header `k,s1..sn,u1..um,Sk,Nk,qp_status,fallback,safe`; rows k = 0..N.
void write_trace_csv(std::ostream& os, const MissionTrace& trace, const Polytope<double>& poly);
/// Header `missions,successes,ratio,S_certified`.
void write_summary_csv(std::ostream& os, const BatchStats& stats);
/// Header `k,mean_Sk,mean_Nk,fallbacks`.
void write_steps_csv(std::ostream& os, const BatchStats& stats);

}  // namespace mwsmpc
