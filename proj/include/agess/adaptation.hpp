#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "agess/elliptical.hpp"
#include "agess/errors.hpp"
#include "agess/kernels.hpp"
#include "agess/rng.hpp"
#include "agess/target.hpp"
#include "agess/trace.hpp"

namespace agess {

// Commit iterations N_j = sum_{i<=j} floor(i^beta) of the increasingly-rare
// adaptation schedule (Chimisov, Latuszynski & Roberts 2018).
class AirSchedule {
 public:
  explicit AirSchedule(double beta) : beta_(beta) {
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw std::invalid_argument("AirSchedule: beta must lie in (0, 1]");
    }
  }

  std::int64_t next() {
    ++j_;
    sum_ += static_cast<std::int64_t>(
        std::floor(std::pow(static_cast<double>(j_), beta_) + 1e-10));
    return sum_;
  }

 private:
  double beta_;
  std::int64_t j_ = 0;
  std::int64_t sum_ = 0;
};

// Decay exponent of the background adaptation weights w_i = i^{-d_w},
// chosen by target dimension.
inline double weight_exponent(Eigen::Index dim) {
  const double root = std::cbrt(static_cast<double>(dim));
  return std::max(2.0 / 3.0, (root - 1.0) / root);
}

// Weighted running mean and scale fed into commits at schedule times. The
// covariance update uses the already-updated mean, matching the update order
// the commits are defined around.
struct AdaptiveEstimator {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scale;
  std::int64_t iteration = 1;
  double decay = 2.0 / 3.0;

  AdaptiveEstimator(Eigen::VectorXd mu0, Eigen::MatrixXd sigma0)
      : mean(std::move(mu0)), scale(std::move(sigma0)) {
    decay = weight_exponent(mean.size());
  }
};

inline void background_update(AdaptiveEstimator& est, const Eigen::VectorXd& x,
                              std::int64_t i) {
  const double w = std::pow(static_cast<double>(i), -est.decay);
  est.mean = (1.0 - w) * est.mean + w * x;
  const Eigen::VectorXd centered = x - est.mean;
  est.scale = (1.0 - w) * est.scale + w * (centered * centered.transpose());
  est.iteration = i;
}

enum class AdaptVariant { FullCovariance, ScalarScale };

// Turn the background estimate into working parameters. The full-covariance
// variant commits (mean, scale) with jitter-repaired factorization; the
// scalar variant keeps the initial mean and commits an isotropic scale
// trace(scale)/P.
inline EllipticalParams commit_adaptation(const AdaptiveEstimator& est,
                                          const Eigen::VectorXd& mu0,
                                          const EllipticalFamily& family,
                                          AdaptVariant variant) {
  if (variant == AdaptVariant::ScalarScale) {
    const double sigma2 =
        est.scale.trace() / static_cast<double>(est.scale.rows());
    Eigen::MatrixXd iso =
        sigma2 * Eigen::MatrixXd::Identity(est.scale.rows(), est.scale.cols());
    return EllipticalParams(mu0, std::move(iso), family);
  }
  return EllipticalParams(est.mean, est.scale, family);
}

// Per-coordinate support handling: positive coordinates are sampled on the
// log scale and the Jacobian (the coordinate's value in transformed space)
// is added to the transformed-space log density.
struct SupportTransform {
  enum class Coord : std::uint8_t { Identity, LogPositive };

  std::vector<Coord> coords;

  static SupportTransform identity(Eigen::Index dim) {
    SupportTransform t;
    t.coords.assign(static_cast<std::size_t>(dim), Coord::Identity);
    return t;
  }

  bool has_log() const {
    for (Coord c : coords) {
      if (c == Coord::LogPositive) return true;
    }
    return false;
  }

  Eigen::VectorXd to_transformed(const Eigen::VectorXd& original) const {
    Eigen::VectorXd out = original;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (coords[static_cast<std::size_t>(i)] == Coord::LogPositive) {
        if (!(original[i] > 0.0)) {
          throw std::invalid_argument(
              "SupportTransform: log coordinate must be positive");
        }
        out[i] = std::log(original[i]);
      }
    }
    return out;
  }

  Eigen::VectorXd to_original(const Eigen::VectorXd& transformed) const {
    Eigen::VectorXd out = transformed;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      if (coords[static_cast<std::size_t>(i)] == Coord::LogPositive) {
        out[i] = std::exp(transformed[i]);
      }
    }
    return out;
  }

  // Target over the transformed coordinates, including Jacobian terms.
  TargetDensity wrap(const TargetDensity& target) const {
    if (!has_log()) return target;
    SupportTransform self = *this;
    TargetDensity inner = target;
    return TargetDensity(
        target.name() + "_log", target.dim(),
        [self, inner](const Eigen::VectorXd& t) {
          const double base = inner.log_density(self.to_original(t));
          if (base == neg_inf) return neg_inf;
          double jacobian = 0.0;
          for (Eigen::Index i = 0; i < t.size(); ++i) {
            if (self.coords[static_cast<std::size_t>(i)] ==
                Coord::LogPositive) {
              jacobian += t[i];
            }
          }
          return base + jacobian;
        });
  }
};

struct AdaptConfig {
  double beta = 0.5;
  // Negative means "resolve by dimension": 0.1 below dimension 10, 0.05 from
  // dimension 10 up.
  double eps_a = -1.0;
  double eps_b = 0.05;
  std::int64_t iterations = 0;
  std::int64_t burn_in = 0;
  double burn_1d_fraction = 0.1;
  std::uint64_t seed = 0;
  AdaptVariant variant = AdaptVariant::FullCovariance;
  bool adapt = true;  // false suppresses commits, freezing the kernel
  int shrink_max_iter = 10000;

  double resolved_eps_a(Eigen::Index dim) const {
    if (eps_a >= 0.0) return eps_a;
    return dim < 10 ? 0.1 : 0.05;
  }

  void validate(Eigen::Index dim) const {
    if (!(beta > 0.0 && beta <= 1.0)) {
      throw ConfigError("AdaptConfig: beta must lie in (0, 1]");
    }
    const double ea = resolved_eps_a(dim);
    if (ea < 0.0 || ea > 1.0 || eps_b < 0.0 || eps_b > 1.0 ||
        ea + eps_b > 1.0) {
      throw ConfigError("AdaptConfig: kernel mixture probabilities invalid");
    }
    if (!(burn_1d_fraction >= 0.0 && burn_1d_fraction <= 1.0)) {
      throw ConfigError("AdaptConfig: burn_1d_fraction must lie in [0, 1]");
    }
    if (iterations < 1) throw ConfigError("AdaptConfig: iterations must be >= 1");
    if (burn_in < 0 || burn_in >= iterations) {
      throw ConfigError("AdaptConfig: burn_in must lie in [0, iterations)");
    }
  }
};

// A chain abort carries the partial trace for post-mortem diagnostics.
struct ChainAbort : SamplingError {
  ChainAbort(const std::string& what, Trace partial_trace, std::int64_t iter)
      : SamplingError(what + " (iteration " + std::to_string(iter) + ")"),
        partial(std::move(partial_trace)),
        at_iteration(iter) {}
  Trace partial;
  std::int64_t at_iteration;
};

// The full adaptive driver. States, working parameters, and the initial
// state live in transformed space; the emitted trace is mapped back to the
// original coordinates. Kernel selection per iteration:
//   P >= 10: forced coordinate sweeps for the first burn_1d_fraction of the
//            burn-in, then sweeps w.p. eps_b, non-adaptive full steps at
//            (mu0, sigma0) w.p. eps_a, adaptive full steps otherwise;
//   P <  10: non-adaptive w.p. eps_a, adaptive otherwise, no sweeps.
// The background estimator updates after every iteration and is committed to
// the working parameters at the schedule times.
inline Trace run_agess(const TargetDensity& target,
                       const SupportTransform& transform,
                       const EllipticalFamily& family,
                       const Eigen::VectorXd& mu0, const Eigen::MatrixXd& sigma0,
                       const AdaptConfig& config,
                       std::optional<Eigen::VectorXd> initial_state = {}) {
  using clock = std::chrono::steady_clock;

  const Eigen::Index dim = target.dim();
  config.validate(dim);

  const TargetDensity working_target = transform.wrap(target).fork();
  const std::uint64_t evals_before = working_target.evals();

  const EllipticalParams base_params(mu0, sigma0, family);
  EllipticalParams params = base_params;

  Eigen::VectorXd x = initial_state ? *initial_state : mu0;
  if (x.size() != dim) {
    throw std::invalid_argument("run_agess: initial state dimension mismatch");
  }
  if (!(working_target.log_density(x) > neg_inf)) {
    throw SamplingError("run_agess: target is -inf at the initial state");
  }

  StreamPair streams = make_streams(config.seed);

  AdaptiveEstimator estimator(mu0, sigma0);
  AirSchedule schedule(config.beta);
  std::int64_t next_commit = schedule.next();
  while (next_commit < 2) next_commit = schedule.next();

  const double eps_a = config.resolved_eps_a(dim);
  const double eps_b = dim >= 10 ? config.eps_b : 0.0;
  const std::int64_t sweep_cutoff = static_cast<std::int64_t>(
      std::floor(config.burn_1d_fraction * static_cast<double>(config.burn_in)));

  const std::int64_t n = config.iterations;
  Trace trace;
  trace.states.resize(n, dim);
  trace.loop_counts.assign(static_cast<std::size_t>(n), 0);
  trace.kernel_tags.assign(static_cast<std::size_t>(n),
                           KernelTag::AdaptiveFull);
  trace.burn_in = config.burn_in;
  trace.states.row(0) = transform.to_original(x).transpose();

  const auto t_start = clock::now();
  auto t_burn_end = t_start;
  bool burn_closed = config.burn_in == 0;
  if (burn_closed) t_burn_end = t_start;

  for (std::int64_t i = 2; i <= n; ++i) {
    try {
      std::pair<Eigen::VectorXd, StepStats> step{Eigen::VectorXd(), StepStats{}};
      if (dim >= 10 && i <= sweep_cutoff) {
        step = coord_sweep(working_target, params, x, streams.kernel,
                           config.shrink_max_iter);
      } else if (dim >= 10) {
        const double v = uniform01(streams.driver);
        if (eps_a + eps_b > 0.0 && v <= eps_a + eps_b) {
          const bool sweep =
              uniform01(streams.driver) < eps_b / (eps_a + eps_b);
          if (sweep) {
            step = coord_sweep(working_target, params, x, streams.kernel,
                               config.shrink_max_iter);
          } else {
            step = agess_step(working_target, base_params, x, streams.kernel,
                              config.shrink_max_iter,
                              KernelTag::NonAdaptiveFull);
          }
        } else {
          step = agess_step(working_target, params, x, streams.kernel,
                            config.shrink_max_iter, KernelTag::AdaptiveFull);
        }
      } else {
        const double v = uniform01(streams.driver);
        if (v <= eps_a) {
          step = agess_step(working_target, base_params, x, streams.kernel,
                            config.shrink_max_iter,
                            KernelTag::NonAdaptiveFull);
        } else {
          step = agess_step(working_target, params, x, streams.kernel,
                            config.shrink_max_iter, KernelTag::AdaptiveFull);
        }
      }
      x = std::move(step.first);
      trace.states.row(i - 1) = transform.to_original(x).transpose();
      trace.loop_counts[static_cast<std::size_t>(i - 1)] =
          step.second.loop_count;
      trace.kernel_tags[static_cast<std::size_t>(i - 1)] = step.second.tag;
    } catch (const SamplingError& err) {
      trace.states.conservativeResize(i - 1, dim);
      trace.loop_counts.resize(static_cast<std::size_t>(i - 1));
      trace.kernel_tags.resize(static_cast<std::size_t>(i - 1));
      trace.density_evals = working_target.evals() - evals_before;
      throw ChainAbort(err.what(), std::move(trace), i);
    }

    background_update(estimator, x, i);
    if (config.adapt && i == next_commit) {
      params = commit_adaptation(estimator, mu0, family, config.variant);
      CommitRecord record;
      record.iteration = i;
      record.mean = params.mean;
      record.scale_diag = params.scale.diagonal();
      trace.commits.push_back(std::move(record));
      next_commit = schedule.next();
    } else if (i == next_commit) {
      next_commit = schedule.next();
    }

    if (!burn_closed && i >= config.burn_in) {
      t_burn_end = clock::now();
      burn_closed = true;
    }
  }

  const auto t_end = clock::now();
  if (!burn_closed) t_burn_end = t_end;
  trace.timings.burn_seconds =
      std::chrono::duration<double>(t_burn_end - t_start).count();
  trace.timings.sampling_seconds =
      std::chrono::duration<double>(t_end - t_burn_end).count();
  trace.density_evals = working_target.evals() - evals_before;
  return trace;
}

namespace detail {

template <typename StepFn>
Trace run_fixed_kernel(const TargetDensity& target, const Eigen::VectorXd& init,
                       std::int64_t iterations, std::int64_t burn_in,
                       StepFn&& step_fn) {
  using clock = std::chrono::steady_clock;
  const Eigen::Index dim = target.dim();
  if (iterations < 1) throw ConfigError("run: iterations must be >= 1");

  Trace trace;
  trace.states.resize(iterations, dim);
  trace.loop_counts.assign(static_cast<std::size_t>(iterations), 0);
  trace.kernel_tags.assign(static_cast<std::size_t>(iterations),
                           KernelTag::NonAdaptiveFull);
  trace.burn_in = burn_in;

  Eigen::VectorXd x = init;
  trace.states.row(0) = x.transpose();
  const std::uint64_t evals_before = target.evals();

  const auto t_start = clock::now();
  auto t_burn_end = t_start;
  bool burn_closed = burn_in == 0;

  for (std::int64_t i = 2; i <= iterations; ++i) {
    try {
      std::pair<Eigen::VectorXd, StepStats> step = step_fn(x);
      x = std::move(step.first);
      trace.states.row(i - 1) = x.transpose();
      trace.loop_counts[static_cast<std::size_t>(i - 1)] =
          step.second.loop_count;
      trace.kernel_tags[static_cast<std::size_t>(i - 1)] = step.second.tag;
    } catch (const SamplingError& err) {
      trace.states.conservativeResize(i - 1, dim);
      trace.loop_counts.resize(static_cast<std::size_t>(i - 1));
      trace.kernel_tags.resize(static_cast<std::size_t>(i - 1));
      trace.density_evals = target.evals() - evals_before;
      throw ChainAbort(err.what(), std::move(trace), i);
    }
    if (!burn_closed && i >= burn_in) {
      t_burn_end = clock::now();
      burn_closed = true;
    }
  }
  const auto t_end = clock::now();
  if (!burn_closed) t_burn_end = t_end;
  trace.timings.burn_seconds =
      std::chrono::duration<double>(t_burn_end - t_start).count();
  trace.timings.sampling_seconds =
      std::chrono::duration<double>(t_end - t_burn_end).count();
  trace.density_evals = target.evals() - evals_before;
  return trace;
}

}  // namespace detail

// Classical elliptical slice sampler at a fixed Gaussian prior; the slice
// predicate runs on the target over the prior density.
inline Trace run_fixed_ess(const TargetDensity& target,
                           const EllipticalParams& prior,
                           std::int64_t iterations, std::int64_t burn_in,
                           std::uint64_t seed,
                           std::optional<Eigen::VectorXd> initial_state = {},
                           int shrink_max_iter = 10000) {
  const TargetDensity working = target.fork();
  const auto loglik = [&working, &prior](const Eigen::VectorXd& v) {
    const double t = working.log_density(v);
    if (t == neg_inf) return neg_inf;
    return t - log_density(prior, v);
  };
  Eigen::VectorXd init = initial_state ? *initial_state : prior.mean;
  Rng rng = make_streams(seed).kernel;
  return detail::run_fixed_kernel(
      working, init, iterations, burn_in, [&](const Eigen::VectorXd& x) {
        return ess_step(loglik, prior, x, rng, shrink_max_iter);
      });
}

// Adaptive random-walk chain over the full run.
inline Trace run_arw(const TargetDensity& target, const Eigen::VectorXd& init,
                     const Eigen::MatrixXd& sigma0, std::int64_t iterations,
                     std::int64_t burn_in, std::uint64_t seed) {
  const TargetDensity working = target.fork();
  ArwState state(target.dim(), sigma0);
  Rng rng = make_streams(seed).kernel;
  return detail::run_fixed_kernel(
      working, init, iterations, burn_in, [&](const Eigen::VectorXd& x) {
        return arw_step(working, state, x, rng);
      });
}

}  // namespace agess
