#include "mwsmpc/scenario.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <string>

namespace mwsmpc {

std::int64_t required_sample_count(double s_k, double beta, std::int64_t d_k) {
  if (!(s_k >= 0.0 && s_k < 1.0))
    throw std::invalid_argument("risk bound must lie in [0, 1), got " + std::to_string(s_k));
  if (!(beta > 0.0 && beta < 1.0))
    throw std::invalid_argument("beta must lie in (0, 1)");
  if (d_k < 1) throw std::invalid_argument("d_k must be >= 1");

  const double bound = 2.0 / (1.0 - s_k) * (std::log(1.0 / beta) + static_cast<double>(d_k));
  auto n = static_cast<std::int64_t>(std::ceil(bound));
  if (static_cast<double>(n - 1) >= bound * (1.0 - 1e-12)) --n;
  return n;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  detail::require_shape(sigma.rows() == sigma.cols(), "covariance must be square");
  Eigen::LDLT<Eigen::MatrixXd> ldlt(sigma);
  if (ldlt.info() != Eigen::Success)
    throw std::invalid_argument("covariance factorization failed");
  Eigen::VectorXd d = ldlt.vectorD();
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (d(i) < -1e-10) throw std::invalid_argument("covariance is indefinite");
    d(i) = std::sqrt(std::max(d(i), 0.0));
  }
  Eigen::MatrixXd lower = ldlt.matrixL();
  Eigen::MatrixXd f = lower * d.asDiagonal();
  return ldlt.transpositionsP().transpose() * f;
}

ScenarioBatch draw_scenarios(RandomStream& rng, const Eigen::MatrixXd& sigma_w, int h,
                             Eigen::Index count) {
  if (h < 1) throw std::invalid_argument("horizon must be >= 1");
  if (count < 1) throw std::invalid_argument("scenario count must be >= 1");
  const Eigen::MatrixXd factor = covariance_factor(sigma_w);
  const Eigen::Index n = sigma_w.rows();

  ScenarioBatch batch;
  batch.seed_lineage = rng.id();
  batch.horizon = h;
  batch.samples.resize(h * n, count);
  Eigen::MatrixXd z(n, count);
  for (int j = 0; j < h; ++j) {
    rng.fill_normal(z);
    batch.samples.middleRows(j * n, n).noalias() = factor * z;
  }
  return batch;
}

}  // namespace mwsmpc
