#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "agess/cholesky.hpp"
#include "agess/elliptical.hpp"
#include "agess/errors.hpp"
#include "agess/rng.hpp"
#include "agess/target.hpp"

namespace agess {

// Design matrix, response, and the generation parameters needed to
// reconstruct the ground truth exactly.
struct Dataset {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  nlohmann::json meta;

  Eigen::Index n() const { return y.size(); }
  Eigen::Index d() const { return X.cols(); }
};

// --- dataset IO: CSV with a sidecar JSON meta file ------------------------

inline void save_dataset(const Dataset& data, const std::string& base_path) {
  std::ofstream csv(base_path + ".csv");
  if (!csv) throw ConfigError("save_dataset: cannot open " + base_path + ".csv");
  csv.precision(17);
  for (Eigen::Index j = 0; j < data.d(); ++j) csv << "x_" << (j + 1) << ",";
  csv << "y\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) csv << data.X(i, j) << ",";
    csv << data.y[i] << "\n";
  }
  std::ofstream meta(base_path + ".meta.json");
  meta << data.meta.dump(2) << "\n";
}

inline Dataset load_dataset(const std::string& base_path) {
  std::ifstream csv(base_path + ".csv");
  if (!csv) throw ConfigError("load_dataset: cannot open " + base_path + ".csv");
  std::string line;
  if (!std::getline(csv, line)) {
    throw ConfigError("load_dataset: empty file " + base_path + ".csv");
  }
  Eigen::Index cols = static_cast<Eigen::Index>(
      std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> values;
  Eigen::Index rows = 0;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) values.push_back(std::stod(cell));
    ++rows;
  }
  Dataset data;
  data.X.resize(rows, cols - 1);
  data.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols - 1; ++j) {
      data.X(i, j) = values[static_cast<std::size_t>(i * cols + j)];
    }
    data.y[i] = values[static_cast<std::size_t>(i * cols + cols - 1)];
  }
  std::ifstream meta(base_path + ".meta.json");
  if (meta) meta >> data.meta;
  return data;
}

// --- analytic targets ------------------------------------------------------

inline TargetDensity gaussian_target(const Eigen::VectorXd& mean,
                                     const Eigen::MatrixXd& sigma) {
  const Eigen::Index dim = mean.size();
  // Isotropic fast path; the dense route costs a triangular solve per call.
  const double s0 = sigma(0, 0);
  if (sigma.isApprox(s0 * Eigen::MatrixXd::Identity(dim, dim), 0.0)) {
    const double log_norm =
        -0.5 * static_cast<double>(dim) *
        (std::log(2.0 * std::numbers::pi) + std::log(s0));
    Eigen::VectorXd mu = mean;
    return TargetDensity("gaussian", dim, [mu, s0, log_norm](const Eigen::VectorXd& x) {
      return log_norm - 0.5 * (x - mu).squaredNorm() / s0;
    });
  }
  Eigen::MatrixXd chol = jittered_cholesky(sigma);
  const double log_norm = -0.5 * (static_cast<double>(dim) *
                                      std::log(2.0 * std::numbers::pi) +
                                  log_det_from_cholesky(chol));
  Eigen::VectorXd mu = mean;
  return TargetDensity("gaussian", dim, [mu, chol, log_norm](const Eigen::VectorXd& x) {
    const double q =
        chol.triangularView<Eigen::Lower>().solve(x - mu).squaredNorm();
    return log_norm - 0.5 * q;
  });
}

// Ridge distribution concentrated on the unit sphere: log density
// ||x|| - ||x||^2 / 2 (Natarovskii, Rudolf & Sprungk 2021).
inline TargetDensity volcano_target(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("volcano_target: dim must be >= 1");
  return TargetDensity("volcano", dim, [](const Eigen::VectorXd& x) {
    const double r = x.norm();
    return r - 0.5 * r * r;
  });
}

// --- banana and twin banana ------------------------------------------------

// Posterior over (theta1, theta2) of the hierarchical model with mean
// (theta1 - mu1) + (theta2 - mu2)^2, unit observation variance, and priors
// N(0, 4) and N(0.5, 4). Only the sufficient statistics of y enter.
inline TargetDensity banana_target(const Eigen::VectorXd& y, double mu1,
                                   double mu2) {
  const double n = static_cast<double>(y.size());
  const double sum_y = y.sum();
  const double sum_y2 = y.squaredNorm();
  return TargetDensity("banana", 2, [=](const Eigen::VectorXd& theta) {
    const double m = (theta[0] - mu1) + (theta[1] - mu2) * (theta[1] - mu2);
    const double rss = sum_y2 - 2.0 * m * sum_y + n * m * m;
    return -0.5 * rss - theta[0] * theta[0] / 8.0 -
           (theta[1] - 0.5) * (theta[1] - 0.5) / 8.0;
  });
}

inline Eigen::VectorXd banana_data(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = 0.1 + normal(rng);
  return y;
}

// Two isolated banana-shaped modes: mean 0.1 a^2 - 0.5 b^4 - 10 a b with
// a = theta1 - mu1, b = theta2 - mu2, observation variance 100, N(0, 4)
// priors on both coordinates.
inline TargetDensity twin_banana_target(const Eigen::VectorXd& y, double mu1,
                                        double mu2) {
  const double n = static_cast<double>(y.size());
  const double sum_y = y.sum();
  const double sum_y2 = y.squaredNorm();
  return TargetDensity("twin_banana", 2, [=](const Eigen::VectorXd& theta) {
    const double a = theta[0] - mu1;
    const double b = theta[1] - mu2;
    const double m = 0.1 * a * a - 0.5 * b * b * b * b - 10.0 * a * b;
    const double rss = sum_y2 - 2.0 * m * sum_y + n * m * m;
    return -rss / 200.0 - theta[0] * theta[0] / 8.0 -
           theta[1] * theta[1] / 8.0;
  });
}

inline Eigen::VectorXd twin_banana_data(Eigen::Index n, Rng& rng) {
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = 100.0 + 10.0 * normal(rng);
  return y;
}

// --- generalized ReLU regression -------------------------------------------

namespace detail {

inline double softplus(double v) {
  return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
}

}  // namespace detail

// Bernoulli likelihood through a logistic link of mu_i = max(0, x_i' beta),
// standard normal prior on beta. Non-differentiable wherever a constraint
// is active.
inline TargetDensity relu_regression_target(const Dataset& data) {
  Eigen::MatrixXd X = data.X;
  Eigen::VectorXd y = data.y;
  return TargetDensity(
      "relu_regression", X.cols(), [X, y](const Eigen::VectorXd& beta) {
        const Eigen::VectorXd mu = (X * beta).cwiseMax(0.0);
        double loglik = 0.0;
        for (Eigen::Index i = 0; i < mu.size(); ++i) {
          loglik += y[i] * mu[i] - detail::softplus(mu[i]);
        }
        return loglik - 0.5 * beta.squaredNorm();
      });
}

inline Dataset relu_data(Eigen::Index n, Eigen::Index d, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("relu_data: n, d must be >= 1");
  const double mu_x = 0.5 * normal(rng);
  const double scale = std::sqrt(2.0 * std::log(static_cast<double>(d)));

  Eigen::VectorXd beta_true;
  if (scale > 0.0) {
    EllipticalParams t_law(Eigen::VectorXd::Zero(d),
                           scale * Eigen::MatrixXd::Identity(d, d),
                           EllipticalFamily::student_t(6.0));
    beta_true = sample_marginal(t_law, rng);
  } else {
    beta_true = Eigen::VectorXd::Zero(d);
  }

  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) data.X(i, j) = mu_x + normal(rng);
    const double mu_i = std::max(0.0, data.X.row(i).dot(beta_true));
    const double p = 1.0 / (1.0 + std::exp(-mu_i));
    data.y[i] = uniform01(rng) < p ? 1.0 : 0.0;
  }
  data.meta = {{"model", "relu_regression"},
               {"n", n},
               {"d", d},
               {"mu_x", mu_x},
               {"beta_true", std::vector<double>(
                                 beta_true.data(), beta_true.data() + d)}};
  return data;
}

// --- horseshoe regression ---------------------------------------------------

// Gaussian linear model with the horseshoe prior, parameterized as
// (beta_1..beta_D, log lambda_1..log lambda_D, log tau, log sigma2); the
// dimension is 2D + 2. Half-Cauchy priors contribute their log density plus
// the log-scale Jacobian; the Jeffreys prior on sigma2 is flat in log sigma2.
inline TargetDensity horseshoe_target(const Dataset& data) {
  if (data.n() < 1 || data.d() < 1) {
    throw std::invalid_argument("horseshoe_target: need n, d >= 1");
  }
  Eigen::MatrixXd X = data.X;
  Eigen::VectorXd y = data.y;
  const Eigen::Index d = X.cols();
  const Eigen::Index dim = 2 * d + 2;
  const double log_two_over_pi = std::log(2.0 / std::numbers::pi);
  const double log_2pi = std::log(2.0 * std::numbers::pi);

  return TargetDensity("horseshoe", dim, [=](const Eigen::VectorXd& w) {
    const auto beta = w.head(d);
    const auto log_lambda = w.segment(d, d);
    const double log_tau = w[2 * d];
    const double log_sigma2 = w[2 * d + 1];
    const double sigma2 = std::exp(log_sigma2);
    const double n = static_cast<double>(y.size());

    double value = -0.5 * n * (log_2pi + log_sigma2) -
                   0.5 * (y - X * beta).squaredNorm() / sigma2;

    // beta_j ~ N(0, sigma2 tau^2 lambda_j^2)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double log_var = log_sigma2 + 2.0 * log_tau + 2.0 * log_lambda[j];
      value += -0.5 * (log_2pi + log_var) -
               0.5 * beta[j] * beta[j] * std::exp(-log_var);
    }

    // half-Cauchy scales on the log scale: log C+(e^l) + l
    for (Eigen::Index j = 0; j < d; ++j) {
      value += log_two_over_pi - std::log1p(std::exp(2.0 * log_lambda[j])) +
               log_lambda[j];
    }
    value += log_two_over_pi - std::log1p(std::exp(2.0 * log_tau)) + log_tau;

    // p(sigma2) ~ 1/sigma2 is constant in log sigma2
    return value;
  });
}

inline Dataset horseshoe_data(Eigen::Index n, Eigen::Index d, Rng& rng) {
  if (n < 1 || d < 1) throw std::invalid_argument("horseshoe_data: n, d must be >= 1");
  Eigen::MatrixXd corr(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      corr(j, k) = std::pow(0.8, std::abs(static_cast<double>(j - k)));
    }
  }
  const Eigen::MatrixXd chol = jittered_cholesky(corr);

  Eigen::VectorXd beta_true = Eigen::VectorXd::Zero(d);
  for (;;) {
    bool any_nonzero = false;
    for (Eigen::Index j = 0; j < d; ++j) {
      if (uniform01(rng) < 0.05) {
        const double z = 1.0 + 3.0 * normal(rng);
        beta_true[j] = (j % 2 == 0 ? 1.0 : -1.0) * z;
        any_nonzero = true;
      } else {
        beta_true[j] = 0.0;
      }
    }
    if (any_nonzero) break;
  }

  Dataset data;
  data.X.resize(n, d);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    data.X.row(i) = (chol * normal_vector(rng, d)).transpose();
    data.y[i] = data.X.row(i).dot(beta_true) + normal(rng);
  }
  data.meta = {{"model", "horseshoe"},
               {"n", n},
               {"d", d},
               {"sigma2", 1.0},
               {"beta_true", std::vector<double>(
                                 beta_true.data(), beta_true.data() + d)}};
  return data;
}

// --- deep Gaussian process surrogate ----------------------------------------

// Two-layer deep GP joint log posterior over (W_1..W_N, log theta_y1,
// log theta_y2, log theta_w1); the outer noise scale tau is integrated out
// against Inv-Gamma(nu/2, nu/2), leaving a multivariate-t marginal for y.
// Lengthscales carry standard normal priors on the log scale (a config knob,
// not part of the model definition).
inline TargetDensity deep_gp_target(const Eigen::VectorXd& inputs,
                                    const Eigen::VectorXd& y, double g_w,
                                    double g_y, double nu,
                                    double lengthscale_prior_sd = 1.0) {
  const Eigen::Index n = inputs.size();
  if (y.size() != n) throw std::invalid_argument("deep_gp_target: size mismatch");
  const Eigen::Index dim = n + 3;

  // Squared input distances are fixed by the design.
  Eigen::MatrixXd dx2(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double diff = inputs[i] - inputs[j];
      dx2(i, j) = diff * diff;
    }
  }

  const double log_2pi = std::log(2.0 * std::numbers::pi);
  const double t_norm = std::lgamma(0.5 * (nu + static_cast<double>(n))) -
                        std::lgamma(0.5 * nu) -
                        0.5 * static_cast<double>(n) *
                            std::log(nu * std::numbers::pi);

  return TargetDensity("deep_gp", dim, [=](const Eigen::VectorXd& params) {
    const auto w = params.head(n);
    const double theta_y1 = std::exp(params[n]);
    const double theta_y2 = std::exp(params[n + 1]);
    const double theta_w1 = std::exp(params[n + 2]);
    if (!std::isfinite(theta_y1) || !std::isfinite(theta_y2) ||
        !std::isfinite(theta_w1)) {
      return neg_inf;
    }

    Eigen::MatrixXd k_y(n, n);
    Eigen::MatrixXd k_w(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      k_y(i, i) = 1.0 + g_y;
      k_w(i, i) = 1.0 + g_w;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double dw = w[i] - w[j];
        const double ky =
            std::exp(-(dx2(i, j) / theta_y1 + dw * dw / theta_y2));
        const double kw = std::exp(-dx2(i, j) / theta_w1);
        k_y(i, j) = ky;
        k_y(j, i) = ky;
        k_w(i, j) = kw;
        k_w(j, i) = kw;
      }
    }

    Eigen::LLT<Eigen::MatrixXd> llt_y(k_y);
    if (llt_y.info() != Eigen::Success) return neg_inf;
    Eigen::LLT<Eigen::MatrixXd> llt_w(k_w);
    if (llt_w.info() != Eigen::Success) return neg_inf;

    const Eigen::MatrixXd l_y = llt_y.matrixL();
    const Eigen::MatrixXd l_w = llt_w.matrixL();
    const double logdet_y = log_det_from_cholesky(l_y);
    const double logdet_w = log_det_from_cholesky(l_w);

    const double qy =
        l_y.triangularView<Eigen::Lower>().solve(y).squaredNorm();
    const double qw = l_w.triangularView<Eigen::Lower>().solve(w).squaredNorm();

    // t-marginal of y after integrating tau out
    double value = t_norm - 0.5 * logdet_y -
                   0.5 * (nu + static_cast<double>(n)) * std::log1p(qy / nu);
    // Gaussian layer prior on W
    value += -0.5 * (static_cast<double>(n) * log_2pi + logdet_w + qw);
    // lengthscale priors, already on the log scale
    const double sd2 = lengthscale_prior_sd * lengthscale_prior_sd;
    for (Eigen::Index k = n; k < n + 3; ++k) {
      value += -0.5 * (log_2pi + std::log(sd2) + params[k] * params[k] / sd2);
    }
    return value;
  });
}

// f(x) = sin(x) + 2 exp(-30 x^2) observed on a 50-point uniform grid over
// [-5, 5].
inline Dataset deep_gp_data() {
  const Eigen::Index n = 50;
  Dataset data;
  data.X.resize(n, 1);
  data.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = -5.0 + 10.0 * static_cast<double>(i) /
                                static_cast<double>(n - 1);
    data.X(i, 0) = x;
    data.y[i] = std::sin(x) + 2.0 * std::exp(-30.0 * x * x);
  }
  data.meta = {{"model", "deep_gp"},
               {"n", n},
               {"function", "sin(x) + 2*exp(-30*x^2)"},
               {"domain", {-5.0, 5.0}}};
  return data;
}

}  // namespace agess
