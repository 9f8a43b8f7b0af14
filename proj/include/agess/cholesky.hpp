#pragma once

#include <Eigen/Dense>

#include "agess/errors.hpp"

namespace agess {

// Lower Cholesky factor of a symmetric matrix. A failed factorization is
// repaired by adding delta * I with delta = 1e-10 * mean(diag), doubled on
// each retry up to max_attempts; this keeps adapted covariances usable
// without a user-facing regularization knob.
inline Eigen::MatrixXd jittered_cholesky(const Eigen::MatrixXd& sym,
                                         int max_attempts = 10) {
  Eigen::LLT<Eigen::MatrixXd> llt(sym);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  double delta = 1e-10 * sym.diagonal().mean();
  if (!(delta > 0.0)) {
    throw SamplingError("cholesky: matrix has non-positive diagonal mean");
  }
  const Eigen::MatrixXd id =
      Eigen::MatrixXd::Identity(sym.rows(), sym.cols());
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    llt.compute(sym + delta * id);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    delta *= 2.0;
  }
  throw SamplingError("cholesky: factorization failed after jitter repair");
}

inline double log_det_from_cholesky(const Eigen::MatrixXd& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace agess
