#pragma once

#include "mwsmpc/controller.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace mwsmpc {

/// Invalid or incomplete run configuration. `key` names the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& message);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  MissionSpec spec;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd sigma_w;
  Eigen::MatrixXd C;
  Eigen::VectorXd c;
  Eigen::VectorXd s0;
  std::int64_t n_missions = 1;
  std::string out_dir = ".";

  LinearSystem<double> system() const { return {A, B, sigma_w}; }
  Polytope<double> safe_set() const { return {C, c}; }
};

/**
 * Flat `key = value` text; `#` starts a comment. Values are numbers,
 * bracketed row-major matrices such as `[[1, 1], [0, 1]]`, vectors, or
 * quoted strings. `gamma` may be a scalar (applied to every step) or a list
 * of N-1 values.
 */
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::filesystem::path& path);

/// Inverse of parse_config_text; reparsing yields an identical config.
std::string serialize_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace mwsmpc
