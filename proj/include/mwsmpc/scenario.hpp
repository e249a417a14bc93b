#pragma once

#include "mwsmpc/model.hpp"
#include "mwsmpc/rng.hpp"

#include <cstdint>
#include <stdexcept>

namespace mwsmpc {

/// N_k stacked disturbance sequences, one per column (h*n rows).
struct ScenarioBatch {
  Eigen::MatrixXd samples;
  StreamId seed_lineage;
  int horizon = 0;

  Eigen::Index count() const { return samples.cols(); }
};

/// Row-max of the scenario constraint offsets.
template <typename Scalar>
struct ReducedConstraints {
  Vec<Scalar> i_max;
  Eigen::Index n_scenarios_used = 0;
};

/**
 * Smallest N with N >= 2/(1-s_k) * (ln(1/beta) + d_k).
 *
 * A relative slack of 1e-12 absorbs rounding when the bound lands on an
 * integer.
 */
std::int64_t required_sample_count(double s_k, double beta, std::int64_t d_k);

/// F with F F' = sigma, via pivoted LDLT so singular covariances are allowed.
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma);

ScenarioBatch draw_scenarios(RandomStream& rng, const Eigen::MatrixXd& sigma_w, int h,
                             Eigen::Index count);

/// Column i is c_blk * a_err * w_i + c_stack.
template <typename Scalar>
Mat<Scalar> build_h_rows(const MatArg<Scalar>& samples, const StackedPrediction<Scalar>& pred) {
  detail::require_shape(samples.rows() == pred.a_err.cols(),
                        "scenario length does not match the prediction horizon");
  const Mat<Scalar> ca = pred.c_blk * pred.a_err.template triangularView<Eigen::Lower>();
  Mat<Scalar> out = ca * samples;
  out.colwise() += pred.c_stack;
  return out;
}

template <typename Scalar>
ReducedConstraints<Scalar> reduce_rowmax(const Mat<Scalar>& h_rows) {
  if (h_rows.cols() == 0 || h_rows.rows() == 0)
    throw std::invalid_argument("reduce_rowmax needs at least one scenario");
  return {h_rows.rowwise().maxCoeff(), h_rows.cols()};
}

}  // namespace mwsmpc
