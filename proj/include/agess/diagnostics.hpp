#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <json.hpp>

#include "agess/errors.hpp"
#include "agess/rng.hpp"
#include "agess/target.hpp"
#include "agess/trace.hpp"

namespace agess {

namespace detail {

inline Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& states) {
  const Eigen::Index n = states.rows();
  const Eigen::RowVectorXd mean = states.colwise().mean();
  const Eigen::MatrixXd centered = states.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(n - 1);
}

inline double log_det_spd(const Eigen::MatrixXd& m, const char* label) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    throw DiagnosticsError(std::string("multivariate_ess: singular ") + label);
  }
  return 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
}

inline double digamma(double x) {
  double value = 0.0;
  while (x < 6.0) {
    value -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  value += std::log(x) - 0.5 * inv -
           inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return value;
}

// E[log det S] of a p-dimensional sample covariance with m degrees of
// freedom exceeds the true log-determinant by this amount; without the
// correction the determinant ratio inflates badly once p approaches the
// batch count.
inline double wishart_logdet_bias(Eigen::Index p, Eigen::Index m) {
  double bias = 0.0;
  for (Eigen::Index i = 1; i <= p; ++i) {
    bias += digamma(0.5 * static_cast<double>(m - i + 1));
  }
  bias -= static_cast<double>(p) * std::log(0.5 * static_cast<double>(m));
  return bias;
}

}  // namespace detail

// Multivariate effective sample size n (|Lambda| / |Sigma|)^{1/P} (Vats,
// Flegal & Jones 2019) on the final window of the chain. Lambda is the
// sample covariance and Sigma the multivariate batch-means estimate of the
// Monte Carlo long-run covariance with batch size floor(sqrt(n)); both
// log-determinants carry the first-order Wishart bias correction.
inline double multivariate_ess(const Eigen::MatrixXd& states,
                               double final_fraction = 1.0) {
  if (!(final_fraction > 0.0 && final_fraction <= 1.0)) {
    throw std::invalid_argument("multivariate_ess: fraction must lie in (0, 1]");
  }
  const Eigen::Index total = states.rows();
  Eigen::Index n = static_cast<Eigen::Index>(
      std::ceil(final_fraction * static_cast<double>(total)));
  if (n < 4) throw DiagnosticsError("multivariate_ess: window too short");
  const Eigen::MatrixXd window = states.bottomRows(n);

  const Eigen::Index p = window.cols();
  const Eigen::Index b = static_cast<Eigen::Index>(
      std::floor(std::sqrt(static_cast<double>(n))));
  const Eigen::Index a = n / b;
  if (n < 4 * b) {
    throw DiagnosticsError("multivariate_ess: window shorter than 4*sqrt(n)");
  }

  // Trailing a*b rows so partial batches never dilute the estimate.
  const Eigen::MatrixXd used = window.bottomRows(a * b);
  const Eigen::MatrixXd lambda = detail::sample_covariance(used);

  Eigen::MatrixXd batch_means(a, p);
  for (Eigen::Index k = 0; k < a; ++k) {
    batch_means.row(k) = used.middleRows(k * b, b).colwise().mean();
  }
  const Eigen::RowVectorXd grand = used.colwise().mean();
  const Eigen::MatrixXd centered = batch_means.rowwise() - grand;
  const Eigen::MatrixXd sigma = static_cast<double>(b) *
                                (centered.transpose() * centered) /
                                static_cast<double>(a - 1);

  const double log_lambda = detail::log_det_spd(lambda, "Lambda") -
                            detail::wishart_logdet_bias(p, a * b - 1);
  const double log_sigma = detail::log_det_spd(sigma, "Sigma") -
                           detail::wishart_logdet_bias(p, a - 1);
  return static_cast<double>(a * b) *
         std::exp((log_lambda - log_sigma) / static_cast<double>(p));
}

// Effective sample size per iteration of a scalar functional of the state.
template <typename Fn>
double ess_per_iteration(const Eigen::MatrixXd& states, Fn&& functional,
                         double final_fraction = 1.0) {
  Eigen::MatrixXd values(states.rows(), 1);
  for (Eigen::Index i = 0; i < states.rows(); ++i) {
    values(i, 0) = functional(states.row(i).transpose());
  }
  const Eigen::Index n = static_cast<Eigen::Index>(
      std::ceil(final_fraction * static_cast<double>(states.rows())));
  const Eigen::Index b = static_cast<Eigen::Index>(
      std::floor(std::sqrt(static_cast<double>(n))));
  const Eigen::Index used = (n / b) * b;
  return multivariate_ess(values, final_fraction) / static_cast<double>(used);
}

// Multivariate potential scale reduction factor in the largest-eigenvalue
// form (Brooks & Gelman 1998): R^2 = (n-1)/n + ((m+1)/m) lambda_1 with
// lambda_1 the top eigenvalue of W^{-1} B / n.
inline double gelman_rubin(const std::vector<Eigen::MatrixXd>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw DiagnosticsError("gelman_rubin: need at least 2 chains");
  const Eigen::Index n = chains.front().rows();
  const Eigen::Index p = chains.front().cols();
  if (n < 100) throw DiagnosticsError("gelman_rubin: chains shorter than 100");
  for (const auto& chain : chains) {
    if (chain.rows() != n || chain.cols() != p) {
      throw DiagnosticsError("gelman_rubin: chains must have equal shape");
    }
  }

  Eigen::MatrixXd within = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd means(static_cast<Eigen::Index>(m), p);
  for (std::size_t j = 0; j < m; ++j) {
    within += detail::sample_covariance(chains[j]);
    means.row(static_cast<Eigen::Index>(j)) = chains[j].colwise().mean();
  }
  within /= static_cast<double>(m);

  const Eigen::RowVectorXd grand = means.colwise().mean();
  const Eigen::MatrixXd centered = means.rowwise() - grand;
  // B / n, the between-chain covariance of the means
  const Eigen::MatrixXd between =
      centered.transpose() * centered / static_cast<double>(m - 1);

  Eigen::LLT<Eigen::MatrixXd> llt(within);
  if (llt.info() != Eigen::Success) {
    throw DiagnosticsError("gelman_rubin: degenerate within-chain covariance");
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(between,
                                                                   within);
  if (solver.info() != Eigen::Success) {
    throw DiagnosticsError("gelman_rubin: eigen solve failed");
  }
  const double lambda1 = solver.eigenvalues().maxCoeff();
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double r2 = (nn - 1.0) / nn + ((mm + 1.0) / mm) * lambda1;
  return std::sqrt(r2);
}

// Standard biased autocorrelation estimates of one scalar series.
inline Eigen::VectorXd acf(const Eigen::VectorXd& series, Eigen::Index max_lag) {
  const Eigen::Index n = series.size();
  if (max_lag >= n / 4) {
    throw std::invalid_argument("acf: max_lag must be below n/4");
  }
  const double mean = series.mean();
  const Eigen::VectorXd centered = series.array() - mean;
  const double denom = centered.squaredNorm();
  Eigen::VectorXd out(max_lag + 1);
  for (Eigen::Index k = 0; k <= max_lag; ++k) {
    out[k] = centered.head(n - k).dot(centered.tail(n - k)) / denom;
  }
  return out;
}

// --- KL machinery for the Gaussian-on-Gaussian chain ------------------------

// Exact upper bound (x0' Sigma^{-1} x0 + P)(2^{-(n+1)} + pi^{-n/2}) on the
// KL divergence between the target and the n-step transition law of the
// matched elliptical slice sampler started at x0.
inline double gaussian_kl_bound(int n, const Eigen::VectorXd& x0,
                                const Eigen::MatrixXd& sigma) {
  if (n < 3) throw std::domain_error("gaussian_kl_bound: requires n >= 3");
  const Eigen::MatrixXd chol = jittered_cholesky(sigma);
  const double q =
      chol.triangularView<Eigen::Lower>().solve(x0).squaredNorm();
  const double p = static_cast<double>(x0.size());
  return (q + p) * (std::pow(2.0, -(n + 1.0)) +
                    std::pow(std::numbers::pi, -0.5 * n));
}

struct KlEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::int64_t reps = 0;
};

// Monte Carlo average of the conditional KL given the angle sequence: with
// psi = prod_j cos(theta_j),
//   KL = (P/2) log(1 - psi^2) + ((q + P)/2) psi^2 / (1 - psi^2).
// By convexity this upper-bounds the true KL and sits below the closed-form
// bound in expectation.
inline KlEstimate gaussian_kl_estimate(int n, const Eigen::VectorXd& x0,
                                       const Eigen::MatrixXd& sigma,
                                       std::int64_t reps, Rng& rng) {
  if (n < 1) throw std::domain_error("gaussian_kl_estimate: requires n >= 1");
  const Eigen::MatrixXd chol = jittered_cholesky(sigma);
  const double q =
      chol.triangularView<Eigen::Lower>().solve(x0).squaredNorm();
  const double p = static_cast<double>(x0.size());

  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::int64_t r = 0; r < reps; ++r) {
    double psi = 1.0;
    for (int j = 0; j < n; ++j) {
      psi *= std::cos(uniform(rng, 0.0, 2.0 * std::numbers::pi));
    }
    const double psi2 = psi * psi;
    const double kl = 0.5 * p * std::log(1.0 - psi2) +
                      0.5 * (q + p) * psi2 / (1.0 - psi2);
    sum += kl;
    sum_sq += kl * kl;
  }
  KlEstimate out;
  out.reps = reps;
  out.estimate = sum / static_cast<double>(reps);
  const double var =
      (sum_sq - sum * sum / static_cast<double>(reps)) /
      static_cast<double>(reps - 1);
  out.std_error = std::sqrt(var / static_cast<double>(reps));
  return out;
}

// --- 2-d exploration scoring -------------------------------------------------

struct Grid2d {
  double x_lo, x_hi, y_lo, y_hi;
  Eigen::Index nx, ny;
};

// KL(P_grid || Q_samples) where P is the grid-normalized target and Q a
// Gaussian KDE of the samples evaluated on the same grid (Scott bandwidth,
// floored at 1e-12 before the log). The KDE is computed by binning the
// samples and convolving with a separable Gaussian kernel.
inline double relative_kl_2d(const Eigen::MatrixXd& samples,
                             const TargetDensity& target, const Grid2d& grid) {
  if (target.dim() != 2 || samples.cols() != 2) {
    throw std::invalid_argument("relative_kl_2d: requires dimension 2");
  }
  if (grid.nx < 50 || grid.ny < 50) {
    throw std::invalid_argument("relative_kl_2d: need at least 50 cells per axis");
  }
  const Eigen::Index nx = grid.nx;
  const Eigen::Index ny = grid.ny;
  const double dx = (grid.x_hi - grid.x_lo) / static_cast<double>(nx);
  const double dy = (grid.y_hi - grid.y_lo) / static_cast<double>(ny);

  // Grid-normalized target at cell centers.
  Eigen::MatrixXd log_p(nx, ny);
  double max_log = neg_inf;
  Eigen::VectorXd point(2);
  for (Eigen::Index i = 0; i < nx; ++i) {
    point[0] = grid.x_lo + (static_cast<double>(i) + 0.5) * dx;
    for (Eigen::Index j = 0; j < ny; ++j) {
      point[1] = grid.y_lo + (static_cast<double>(j) + 0.5) * dy;
      log_p(i, j) = target.log_density(point);
      if (log_p(i, j) > max_log) max_log = log_p(i, j);
    }
  }
  Eigen::MatrixXd p = (log_p.array() - max_log).exp();
  p /= p.sum();

  // Bin the samples.
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(nx, ny);
  Eigen::Index used = 0;
  for (Eigen::Index s = 0; s < samples.rows(); ++s) {
    const double gx = (samples(s, 0) - grid.x_lo) / dx;
    const double gy = (samples(s, 1) - grid.y_lo) / dy;
    if (gx < 0.0 || gy < 0.0) continue;
    const Eigen::Index i = static_cast<Eigen::Index>(gx);
    const Eigen::Index j = static_cast<Eigen::Index>(gy);
    if (i >= nx || j >= ny) continue;
    counts(i, j) += 1.0;
    ++used;
  }
  if (used == 0) throw DiagnosticsError("relative_kl_2d: no samples on the grid");

  // Scott's rule per dimension.
  const double n_eff = static_cast<double>(samples.rows());
  const double sx = std::sqrt(
      (samples.col(0).array() - samples.col(0).mean()).square().mean());
  const double sy = std::sqrt(
      (samples.col(1).array() - samples.col(1).mean()).square().mean());
  const double factor = std::pow(n_eff, -1.0 / 6.0);
  const double hx = std::max(sx * factor, 0.5 * dx);
  const double hy = std::max(sy * factor, 0.5 * dy);

  // Separable Gaussian convolution of the binned counts.
  const auto kernel = [](double h, double cell, Eigen::Index size) {
    const Eigen::Index radius =
        std::min<Eigen::Index>(size, static_cast<Eigen::Index>(
                                         std::ceil(5.0 * h / cell)));
    Eigen::VectorXd k(2 * radius + 1);
    for (Eigen::Index t = -radius; t <= radius; ++t) {
      const double d = static_cast<double>(t) * cell;
      k[t + radius] = std::exp(-0.5 * d * d / (h * h));
    }
    return k;
  };
  const Eigen::VectorXd kx = kernel(hx, dx, nx);
  const Eigen::VectorXd ky = kernel(hy, dy, ny);
  const Eigen::Index rx = (kx.size() - 1) / 2;
  const Eigen::Index ry = (ky.size() - 1) / 2;

  Eigen::MatrixXd tmp = Eigen::MatrixXd::Zero(nx, ny);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index t = -rx; t <= rx; ++t) {
      const Eigen::Index src = i + t;
      if (src < 0 || src >= nx) continue;
      tmp.row(i) += kx[t + rx] * counts.row(src);
    }
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nx, ny);
  for (Eigen::Index j = 0; j < ny; ++j) {
    for (Eigen::Index t = -ry; t <= ry; ++t) {
      const Eigen::Index src = j + t;
      if (src < 0 || src >= ny) continue;
      q.col(j) += ky[t + ry] * tmp.col(src);
    }
  }
  q /= q.sum();

  double kl = 0.0;
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) {
      if (p(i, j) <= 0.0) continue;
      kl += p(i, j) * (std::log(p(i, j)) -
                       std::log(std::max(q(i, j), 1e-12)));
    }
  }
  return kl;
}

// --- per-trace report ---------------------------------------------------------

struct DiagnosticsReport {
  double mess = 0.0;
  double mess_per_second = 0.0;
  double gelman_rubin = 0.0;  // filled by pooled summaries only
  double mean_loop_count = 0.0;
  std::vector<Eigen::VectorXd> lag_acfs;
  std::map<std::string, std::int64_t> kernel_mix_counts;
  std::uint64_t density_evals = 0;
  std::int64_t iterations = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["mess"] = mess;
    j["mess_per_second"] = mess_per_second;
    if (gelman_rubin > 0.0) j["gelman_rubin"] = gelman_rubin;
    j["mean_loop_count"] = mean_loop_count;
    j["density_evals"] = density_evals;
    j["iterations"] = iterations;
    for (const auto& [tag, count] : kernel_mix_counts) {
      j["kernel_" + tag] = count;
    }
    for (std::size_t c = 0; c < lag_acfs.size(); ++c) {
      j["acf_x" + std::to_string(c + 1)] = std::vector<double>(
          lag_acfs[c].data(), lag_acfs[c].data() + lag_acfs[c].size());
    }
    return j;
  }
};

inline DiagnosticsReport report_for_trace(const Trace& trace,
                                          Eigen::Index acf_max_lag = 20) {
  DiagnosticsReport report;
  report.iterations = trace.iterations();
  report.density_evals = trace.density_evals;
  report.mean_loop_count = trace.mean_loop_count();

  const Eigen::MatrixXd window = trace.sampling_states();
  report.mess = multivariate_ess(window);
  if (trace.timings.sampling_seconds > 0.0) {
    report.mess_per_second = report.mess / trace.timings.sampling_seconds;
  }
  const Eigen::Index max_lag =
      std::min<Eigen::Index>(acf_max_lag, window.rows() / 4 - 1);
  for (Eigen::Index c = 0; c < window.cols(); ++c) {
    report.lag_acfs.push_back(acf(window.col(c), max_lag));
  }
  for (std::size_t i = 1; i < trace.kernel_tags.size(); ++i) {
    ++report.kernel_mix_counts[kernel_tag_name(trace.kernel_tags[i])];
  }
  return report;
}

}  // namespace agess
