#include "mwsmpc/config.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <array>
#include <fstream>
#include <map>
#include <sstream>

namespace mwsmpc {

using nlohmann::json;

ConfigError::ConfigError(std::string key, int line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": key '" + key + "': " + message
                                  : "key '" + key + "': " + message),
      key_(std::move(key)),
      line_(line) {}

namespace {

constexpr std::array kRequired = {"A", "B", "sigma_w", "C", "c", "s0", "Q",
                                  "R", "N", "S0", "gamma", "beta"};
constexpr std::array kOptional = {"sk_cap", "mc_samples", "seed", "missions", "out", "sk_estimator"};

struct Entry {
  json value;
  int line = 0;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known_key(const std::string& key) {
  for (const char* k : kRequired)
    if (key == k) return true;
  for (const char* k : kOptional)
    if (key == k) return true;
  return false;
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }
  [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
    throw ConfigError(key, line(key), msg);
  }

  bool is_number(const std::string& key) const { return entries_.at(key).value.is_number(); }

  double number(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (!v.is_number()) fail(key, "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (!v.is_number_unsigned()) fail(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string string(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (!v.is_string()) fail(key, "expected a quoted string");
    return v.get<std::string>();
  }

  Eigen::VectorXd vector(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (v.is_number()) return Eigen::VectorXd::Constant(1, v.get<double>());
    if (!v.is_array() || v.empty()) fail(key, "expected a non-empty list of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail(key, "expected a list of numbers");
      out(i) = v[i].get<double>();
    }
    return out;
  }

  Eigen::MatrixXd matrix(const std::string& key) const {
    const json& v = entries_.at(key).value;
    if (v.is_number()) return Eigen::MatrixXd::Constant(1, 1, v.get<double>());
    if (!v.is_array() || v.empty() || !v[0].is_array() || v[0].empty())
      fail(key, "expected a non-empty matrix literal [[...], ...]");
    const auto cols = v[0].size();
    Eigen::MatrixXd out(v.size(), cols);
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_array() || v[i].size() != cols) fail(key, "matrix rows must have equal length");
      for (std::size_t j = 0; j < cols; ++j) {
        if (!v[i][j].is_number()) fail(key, "matrix entries must be numbers");
        out(i, j) = v[i][j].get<double>();
      }
    }
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
};

bool symmetric(const Eigen::MatrixXd& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12;
}

double min_eigenvalue(const Eigen::MatrixXd& m) {
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m, Eigen::EigenvaluesOnly)
      .eigenvalues()
      .minCoeff();
}

json matrix_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(row);
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(line, line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_key(key)) throw ConfigError(key, line_no, "unknown key");
    if (entries.count(key)) throw ConfigError(key, line_no, "duplicate key");
    if (value.empty()) throw ConfigError(key, line_no, "missing value");
    json parsed;
    try {
      parsed = json::parse(value);
    } catch (const json::parse_error&) {
      throw ConfigError(key, line_no, "malformed value '" + value + "'");
    }
    entries.emplace(key, Entry{std::move(parsed), line_no});
  }
  for (const char* k : kRequired)
    if (!entries.count(k)) throw ConfigError(k, 0, "missing required key");

  const Reader r(std::move(entries));
  RunConfig cfg;
  cfg.A = r.matrix("A");
  cfg.B = r.matrix("B");
  cfg.sigma_w = r.matrix("sigma_w");
  cfg.C = r.matrix("C");
  cfg.c = r.vector("c");
  cfg.s0 = r.vector("s0");

  const Eigen::Index n = cfg.A.rows();
  if (cfg.A.cols() != n) r.fail("A", "must be square");
  if (cfg.B.rows() != n) r.fail("B", "must have " + std::to_string(n) + " rows");
  if (cfg.sigma_w.rows() != n || cfg.sigma_w.cols() != n)
    r.fail("sigma_w", "must be " + std::to_string(n) + " x " + std::to_string(n));
  if (!symmetric(cfg.sigma_w)) r.fail("sigma_w", "must be symmetric");
  if (min_eigenvalue(cfg.sigma_w) < -1e-10) r.fail("sigma_w", "must be positive semidefinite");
  if (cfg.C.cols() != n) r.fail("C", "must have " + std::to_string(n) + " columns");
  for (Eigen::Index i = 0; i < cfg.C.rows(); ++i)
    if ((cfg.C.row(i).array() == 0.0).all()) r.fail("C", "has an all-zero row");
  if (cfg.c.size() != cfg.C.rows()) r.fail("c", "must have one entry per row of C");
  if (cfg.s0.size() != n) r.fail("s0", "must have " + std::to_string(n) + " entries");
  if (((cfg.C * cfg.s0 + cfg.c).array() > 0.0).any()) r.fail("s0", "lies outside the safe set");

  MissionSpec& spec = cfg.spec;
  spec.q_cost = r.matrix("Q");
  spec.r_cost = r.matrix("R");
  const Eigen::Index m = cfg.B.cols();
  if (spec.q_cost.rows() != n || !symmetric(spec.q_cost)) r.fail("Q", "must be symmetric n x n");
  if (min_eigenvalue(spec.q_cost) < -1e-10) r.fail("Q", "must be positive semidefinite");
  if (spec.r_cost.rows() != m || !symmetric(spec.r_cost)) r.fail("R", "must be symmetric m x m");
  if (Eigen::LLT<Eigen::MatrixXd>(spec.r_cost).info() != Eigen::Success)
    r.fail("R", "must be positive definite");

  const std::int64_t n_mission = r.integer("N");
  if (n_mission < 1 || n_mission > 1000) r.fail("N", "must lie in [1, 1000]");
  spec.n_mission = static_cast<int>(n_mission);
  spec.s0_bound = r.number("S0");
  if (!(spec.s0_bound >= 0.0 && spec.s0_bound < 1.0)) r.fail("S0", "must lie in [0, 1)");
  const auto n_gammas = static_cast<std::size_t>(n_mission - 1);
  if (r.is_number("gamma")) {
    spec.gammas.assign(n_gammas, r.number("gamma"));
  } else {
    const Eigen::VectorXd gammas = n_gammas == 0 ? Eigen::VectorXd() : r.vector("gamma");
    if (static_cast<std::size_t>(gammas.size()) != n_gammas)
      r.fail("gamma", "expected a scalar or N-1 = " + std::to_string(n_gammas) + " values");
    spec.gammas.assign(gammas.data(), gammas.data() + gammas.size());
  }
  for (double g : spec.gammas)
    if (!(g > 0.0 && g <= 1.0)) r.fail("gamma", "values must lie in (0, 1]");
  spec.beta = r.number("beta");
  if (!(spec.beta > 0.0 && spec.beta < 1.0)) r.fail("beta", "must lie in (0, 1)");

  if (r.has("sk_cap")) {
    spec.sk_cap = r.number("sk_cap");
    if (!(spec.sk_cap > 0.0 && spec.sk_cap < 1.0)) r.fail("sk_cap", "must lie in (0, 1)");
  }
  if (r.has("mc_samples")) {
    spec.mc_samples = r.integer("mc_samples");
    if (spec.mc_samples < 1) r.fail("mc_samples", "must be >= 1");
  }
  if (r.has("seed")) spec.seed = r.unsigned_integer("seed");
  if (r.has("missions")) {
    cfg.n_missions = r.integer("missions");
    if (cfg.n_missions < 1) r.fail("missions", "must be >= 1");
  }
  if (r.has("out")) cfg.out_dir = r.string("out");
  if (r.has("sk_estimator")) {
    const std::string mode = r.string("sk_estimator");
    if (mode == "lower_conf") spec.sk_from_lower_conf = true;
    else if (mode != "plugin") r.fail("sk_estimator", "must be \"plugin\" or \"lower_conf\"");
  }
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", 0, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
  const MissionSpec& s = cfg.spec;
  std::ostringstream out;
  auto put = [&](const char* key, const json& v) { out << key << " = " << v.dump() << '\n'; };
  put("A", matrix_json(cfg.A));
  put("B", matrix_json(cfg.B));
  put("sigma_w", matrix_json(cfg.sigma_w));
  put("C", matrix_json(cfg.C));
  put("c", vector_json(cfg.c));
  put("s0", vector_json(cfg.s0));
  put("Q", matrix_json(s.q_cost));
  put("R", matrix_json(s.r_cost));
  put("N", s.n_mission);
  put("S0", s.s0_bound);
  put("gamma", json(s.gammas));
  put("beta", s.beta);
  put("sk_cap", s.sk_cap);
  put("mc_samples", s.mc_samples);
  put("seed", s.seed);
  put("missions", cfg.n_missions);
  put("out", cfg.out_dir);
  put("sk_estimator", s.sk_from_lower_conf ? "lower_conf" : "plugin");
  return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const MissionSpec& x = a.spec;
  const MissionSpec& y = b.spec;
  return a.A == b.A && a.B == b.B && a.sigma_w == b.sigma_w && a.C == b.C && a.c == b.c &&
         a.s0 == b.s0 && a.n_missions == b.n_missions && a.out_dir == b.out_dir &&
         x.n_mission == y.n_mission && x.s0_bound == y.s0_bound && x.gammas == y.gammas &&
         x.beta == y.beta && x.q_cost == y.q_cost && x.r_cost == y.r_cost &&
         x.sk_cap == y.sk_cap && x.mc_samples == y.mc_samples && x.seed == y.seed &&
         x.sk_from_lower_conf == y.sk_from_lower_conf;
}

}  // namespace mwsmpc
