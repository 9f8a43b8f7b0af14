#pragma once

#include <cmath>
#include <cstdint>
#include <utility>

#include <Eigen/Dense>

#include "agess/elliptical.hpp"
#include "agess/errors.hpp"
#include "agess/rng.hpp"
#include "agess/shrinkage.hpp"
#include "agess/target.hpp"

namespace agess {

enum class KernelTag : std::uint8_t {
  AdaptiveFull,
  NonAdaptiveFull,
  CoordSweep,
  Arw,
};

inline const char* kernel_tag_name(KernelTag tag) {
  switch (tag) {
    case KernelTag::AdaptiveFull: return "adaptive_full";
    case KernelTag::NonAdaptiveFull: return "non_adaptive_full";
    case KernelTag::CoordSweep: return "coord_sweep";
    case KernelTag::Arw: return "arw";
  }
  return "unknown";
}

struct StepStats {
  int loop_count = 1;    // for sweeps: summed over coordinate updates
  KernelTag tag = KernelTag::AdaptiveFull;
  bool accepted = false;  // meaningful for the random-walk kernel only
};

// Log of the transformed likelihood: the target density divided by the
// working elliptical density. Slice thresholds operate on this quantity, so
// -inf propagates and flags off-support states.
inline double transformed_loglik(const TargetDensity& target,
                                 const EllipticalParams& params,
                                 const Eigen::VectorXd& x) {
  const double t = target.log_density(x);
  if (t == neg_inf) return neg_inf;
  return t - log_density(params, x);
}

// Classical elliptical slice sampling transition (Murray, Adams & MacKay
// 2010). The likelihood is the target over the Gaussian prior; when it is
// constant the first proposed angle is always accepted.
template <typename LogLik>
std::pair<Eigen::VectorXd, StepStats> ess_step(LogLik&& loglik,
                                               const EllipticalParams& prior,
                                               const Eigen::VectorXd& x,
                                               Rng& rng, int max_iter = 10000) {
  if (!prior.family.is_gaussian()) {
    throw std::invalid_argument("ess_step: prior must be Gaussian");
  }
  EllipseProposal prop{x, sample_marginal(prior, rng), prior.mean};
  const double log_threshold = loglik(x) + std::log(uniform01_pos(rng));
  ShrinkResult result = shrink(
      prop, [&](const Eigen::VectorXd& v) { return loglik(v) > log_threshold; },
      rng, max_iter);
  StepStats stats;
  stats.loop_count = result.loop_count;
  stats.tag = KernelTag::NonAdaptiveFull;
  return {std::move(result.point), stats};
}

// One generalized elliptical slice transition at fixed working parameters:
// draw the auxiliary point conditionally on the current state, draw a log
// threshold strictly below the transformed likelihood, and shrink.
inline std::pair<Eigen::VectorXd, StepStats> agess_step(
    const TargetDensity& target, const EllipticalParams& params,
    const Eigen::VectorXd& x, Rng& rng, int max_iter = 10000,
    KernelTag tag = KernelTag::AdaptiveFull) {
  const double lstar = transformed_loglik(target, params, x);
  if (!(lstar > neg_inf)) {
    throw SamplingError(
        "agess_step: transformed likelihood is -inf at the current state");
  }
  EllipseProposal prop{x, sample_conditional_aux(params, x, rng), params.mean};
  const double log_threshold = lstar + std::log(uniform01_pos(rng));
  ShrinkResult result =
      shrink(prop,
             [&](const Eigen::VectorXd& v) {
               return transformed_loglik(target, params, v) > log_threshold;
             },
             rng, max_iter);
  StepStats stats;
  stats.loop_count = result.loop_count;
  stats.tag = tag;
  return {std::move(result.point), stats};
}

// Coordinate-at-a-time sweep of 1-d slice updates, used for fast burn-in
// traversal. Coordinate p uses the working mean and scale diagonal at p; the
// 1-d transformed likelihood is the full joint log density minus the 1-d
// elliptical log density in that coordinate.
inline std::pair<Eigen::VectorXd, StepStats> coord_sweep(
    const TargetDensity& target, const EllipticalParams& params,
    const Eigen::VectorXd& x, Rng& rng, int max_iter = 10000) {
  Eigen::VectorXd state = x;
  int total_loops = 0;
  for (Eigen::Index p = 0; p < params.dim(); ++p) {
    const double mu_p = params.mean[p];
    const double s2_p = params.scale(p, p);
    const auto loglik_1d = [&](double value) {
      state[p] = value;
      const double joint = target.log_density(state);
      if (joint == neg_inf) return neg_inf;
      return joint - scalar::log_density(params.family, mu_p, s2_p, value);
    };

    const double current = state[p];
    const double lstar = loglik_1d(current);
    state[p] = current;
    if (!(lstar > neg_inf)) {
      throw SamplingError(
          "coord_sweep: transformed likelihood is -inf at the current state");
    }
    const double z =
        scalar::sample_conditional_aux(params.family, mu_p, s2_p, current, rng);
    const double log_threshold = lstar + std::log(uniform01_pos(rng));
    ShrinkResult result = shrink_1d(
        current, z, mu_p,
        [&](double value) { return loglik_1d(value) > log_threshold; }, rng,
        max_iter);
    state[p] = result.point[0];
    total_loops += result.loop_count;
  }
  StepStats stats;
  stats.loop_count = total_loops;
  stats.tag = KernelTag::CoordSweep;
  return {std::move(state), stats};
}

// Adaptive random-walk baseline (Haario, Saksman & Tamminen 2001): Gaussian
// proposals with covariance s_d * Cov_t + eps_reg * I, s_d = 2.38^2 / P, and
// the fixed start covariance until iteration 2P. Running moments are updated
// with the new state after the accept/reject decision.
struct ArwState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd m2;  // sum of centered outer products (Welford)
  Eigen::MatrixXd start_cov;
  std::int64_t count = 0;
  double scale;     // 2.38^2 / P
  double eps_reg;

  ArwState(Eigen::Index dim, Eigen::MatrixXd sigma0, double regularization = 1e-6)
      : mean(Eigen::VectorXd::Zero(dim)),
        m2(Eigen::MatrixXd::Zero(dim, dim)),
        start_cov(std::move(sigma0)),
        scale(2.38 * 2.38 / static_cast<double>(dim)),
        eps_reg(regularization) {
    if (start_cov.rows() != dim || start_cov.cols() != dim) {
      throw std::invalid_argument("ArwState: covariance dimension mismatch");
    }
  }

  Eigen::Index dim() const { return mean.size(); }

  Eigen::MatrixXd running_cov() const {
    if (count < 2) return Eigen::MatrixXd::Zero(dim(), dim());
    return m2 / static_cast<double>(count - 1);
  }

  Eigen::MatrixXd proposal_cov() const {
    if (count < 2 * dim()) return start_cov;
    return scale * running_cov() +
           eps_reg * Eigen::MatrixXd::Identity(dim(), dim());
  }

  void update(const Eigen::VectorXd& x) {
    ++count;
    Eigen::VectorXd delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean).transpose();
  }
};

inline std::pair<Eigen::VectorXd, StepStats> arw_step(
    const TargetDensity& target, ArwState& state, const Eigen::VectorXd& x,
    Rng& rng) {
  const Eigen::MatrixXd chol = jittered_cholesky(state.proposal_cov());
  const Eigen::VectorXd proposal = x + chol * normal_vector(rng, state.dim());

  const double log_current = target.log_density(x);
  const double log_proposed = target.log_density(proposal);
  const bool accepted =
      std::log(uniform01_pos(rng)) < log_proposed - log_current;

  Eigen::VectorXd next = accepted ? proposal : x;
  state.update(next);

  StepStats stats;
  stats.loop_count = 1;
  stats.tag = KernelTag::Arw;
  stats.accepted = accepted;
  return {std::move(next), stats};
}

}  // namespace agess
