#include "cli.hpp"

#include "mwsmpc/config.hpp"
#include "mwsmpc/controller.hpp"
#include "mwsmpc/estimator.hpp"
#include "mwsmpc/lqr.hpp"
#include "mwsmpc/oracle.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>

namespace mwsmpc::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> missions;
  std::optional<std::string> out;
  unsigned workers = 0;
  bool traces = false;
  int n_max = 100;
  double s_step = 0.05;
  int instances = 10000;
};

std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

std::string row_string(const Eigen::MatrixXd& m, Eigen::Index i) {
  std::string s = "[";
  for (Eigen::Index j = 0; j < m.cols(); ++j) s += (j ? ", " : "") + fixed4(m(i, j));
  return s + "]";
}

std::string matrix_string(const Eigen::MatrixXd& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) s += (i ? ", " : "") + row_string(m, i);
  return s + "]";
}

RunConfig load(const Options& o) {
  if (o.config.empty()) throw ConfigError("config", 0, "--config is required");
  RunConfig cfg = parse_config(o.config);
  if (o.seed) cfg.spec.seed = *o.seed;
  if (o.missions) {
    if (*o.missions < 1) throw ConfigError("missions", 0, "must be >= 1");
    cfg.n_missions = *o.missions;
  }
  if (o.out) cfg.out_dir = *o.out;
  return cfg;
}

LqrDesign<double> design(const RunConfig& cfg) {
  return solve_dare<double>(cfg.A, cfg.B, cfg.spec.q_cost, cfg.spec.r_cost);
}

std::ofstream open_output(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

int run_lqr(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const auto lqr = design(cfg);
  out << "K = " << (lqr.K.rows() == 1 ? row_string(lqr.K, 0) : matrix_string(lqr.K)) << '\n';
  out << "Q_N = " << matrix_string(lqr.P) << '\n';
  return kExitOk;
}

int run_surface(const Options& o, std::ostream& out) {
  if (o.n_max < 1) throw ConfigError("n-max", 0, "must be >= 1");
  if (!(o.s_step > 0.0 && o.s_step <= 1.0)) throw ConfigError("s-step", 0, "must lie in (0, 1]");
  std::vector<int> n_values;
  for (int n = 1; n <= o.n_max; ++n) n_values.push_back(n);
  std::vector<double> s_values;
  const int steps = static_cast<int>(std::floor(1.0 / o.s_step + 1e-9));
  for (int j = 0; j <= steps; ++j) s_values.push_back(std::min(1.0, j * o.s_step));
  const fs::path dir = o.out.value_or(".");
  auto f = open_output(dir, "swps_surface.csv");
  write_surface_csv(f, n_values, s_values);
  out << "wrote " << (dir / "swps_surface.csv").string() << '\n';
  return kExitOk;
}

int run_mission_cmd(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const MissionContext ctx(cfg.system(), cfg.safe_set(), design(cfg), cfg.spec.n_mission);
  const MissionTrace trace = run_mission(cfg.spec, ctx, cfg.s0, 0);
  auto f = open_output(cfg.out_dir, "mission_trace.csv");
  write_trace_csv(f, trace, ctx.poly());
  out << "success = " << (trace.success ? "true" : "false");
  if (trace.first_violation) out << " (first violation at k = " << *trace.first_violation << ")";
  out << "\nwrote " << (fs::path(cfg.out_dir) / "mission_trace.csv").string() << '\n';
  return kExitOk;
}

int run_batch_cmd(const Options& o, std::ostream& out) {
  const RunConfig cfg = load(o);
  const MissionContext ctx(cfg.system(), cfg.safe_set(), design(cfg), cfg.spec.n_mission);
  BatchOptions bo;
  bo.workers = o.workers;
  if (o.traces) bo.trace_dir = fs::path(cfg.out_dir) / "traces";
  const BatchStats stats = run_batch(cfg.spec, ctx, cfg.s0, cfg.n_missions, cfg.spec.seed, bo);
  {
    auto f = open_output(cfg.out_dir, "batch_summary.csv");
    write_summary_csv(f, stats);
  }
  {
    auto f = open_output(cfg.out_dir, "batch_steps.csv");
    write_steps_csv(f, stats);
  }
  write_summary_csv(out, stats);
  out << "qp optimal = " << stats.qp_optimal << ", not optimal = " << stats.qp_failed << '\n';
  return kExitOk;
}

int run_oracle(const Options& o, std::ostream& out) {
  if (o.instances < 1) throw ConfigError("instances", 0, "must be >= 1");
  RandomStream rng({o.seed.value_or(0), 0, 0, StreamPurpose::kOracle});
  double lemma_err = 0.0;
  int prop_viol = 0, boole_viol = 0;
  for (int i = 0; i < o.instances; ++i) {
    const int n_states = 2 + static_cast<int>(rng.uniform() * 5);
    const int horizon = 2 + static_cast<int>(rng.uniform() * 5);
    const auto chain = oracle::random_chain(rng, n_states, horizon);
    for (int k = 1; k < horizon; ++k) {
      const auto c = oracle::check_lemma1(chain, 0, k);
      lemma_err = std::max(lemma_err, std::abs(c.lhs - c.rhs));
    }
    const auto b = oracle::check_boole(chain, 0);
    boole_viol += b.mwps < b.boole_lower - 1e-12 ? 1 : 0;

    std::vector<double> gammas;
    for (int k = 1; k < horizon; ++k) gammas.push_back(0.8 + 0.2 * rng.uniform());
    const auto switching = oracle::random_policy_switch_chain(rng, n_states, horizon, gammas);
    const auto p = oracle::check_prop1(switching, gammas, 0);
    prop_viol += p.mwps < p.bound - 1e-12 ? 1 : 0;
  }
  out << "instances = " << o.instances << '\n'
      << "prefix decomposition max |lhs - rhs| = " << lemma_err << '\n'
      << "switching bound violations = " << prop_viol << '\n'
      << "boole violations = " << boole_viol << '\n';
  return lemma_err <= 1e-12 && prop_viol == 0 && boole_viol == 0 ? kExitOk : kExitRuntime;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Shrinking-horizon stochastic MPC with mission-wide safety guarantees", "mwsmpc"};
  app.require_subcommand(1);
  Options o;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* c = sub->add_option("--config", o.config, "run configuration file");
    if (needs_config) c->required();
    sub->add_option("--seed", o.seed, "master seed (overrides the config)");
    sub->add_option("--out", o.out, "output directory");
  };

  auto* mission = app.add_subcommand("mission", "run one mission and write its trace");
  add_common(mission, true);
  auto* batch = app.add_subcommand("batch", "run many missions and write summary CSVs");
  add_common(batch, true);
  batch->add_option("--missions", o.missions, "number of missions (overrides the config)");
  batch->add_option("--workers", o.workers, "worker threads (0 = hardware concurrency)");
  batch->add_flag("--traces", o.traces, "also write one trace CSV per mission");
  auto* surface = app.add_subcommand("surface", "write the stage-wise bound surface CSV");
  surface->add_option("--out", o.out, "output directory");
  surface->add_option("--n-max", o.n_max, "largest mission length");
  surface->add_option("--s-step", o.s_step, "grid step of the mission-level probability");
  auto* lqr = app.add_subcommand("lqr", "print the LQR gain and terminal weight");
  add_common(lqr, true);
  auto* orc = app.add_subcommand("oracle", "run the exact finite-chain checks");
  orc->add_option("--seed", o.seed, "seed for the random chains");
  orc->add_option("--instances", o.instances, "number of random chains");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    err << app.help();
    return kExitConfig;
  }

  try {
    if (mission->parsed()) return run_mission_cmd(o, out);
    if (batch->parsed()) return run_batch_cmd(o, out);
    if (surface->parsed()) return run_surface(o, out);
    if (lqr->parsed()) return run_lqr(o, out);
    if (orc->parsed()) return run_oracle(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const MissionConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  err << app.help();
  return kExitConfig;
}

}  // namespace mwsmpc::cli
