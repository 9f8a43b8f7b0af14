#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

// Shared helpers for the statistical tests: moment estimators and a
// two-sample Kolmogorov-Smirnov test with the asymptotic p-value.
namespace testutil {

inline Eigen::VectorXd sample_mean(const Eigen::MatrixXd& draws) {
  return draws.colwise().mean().transpose();
}

inline Eigen::MatrixXd sample_cov(const Eigen::MatrixXd& draws) {
  const Eigen::RowVectorXd mean = draws.colwise().mean();
  const Eigen::MatrixXd centered = draws.rowwise() - mean;
  return centered.transpose() * centered /
         static_cast<double>(draws.rows() - 1);
}

// Asymptotic Kolmogorov distribution tail.
inline double kolmogorov_pvalue(double lambda) {
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? 1.0 : -1.0) * term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

inline double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j]) {
      ++i;
    } else {
      ++j;
    }
    const double fa = static_cast<double>(i) / na;
    const double fb = static_cast<double>(j) / nb;
    d = std::max(d, std::abs(fa - fb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return kolmogorov_pvalue(lambda);
}

// One-sample KS against a cdf callable.
template <typename Cdf>
double ks_one_sample_pvalue(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double hi = static_cast<double>(i + 1) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d = std::max({d, hi, lo});
  }
  const double ne = std::sqrt(n);
  const double lambda = (ne + 0.12 + 0.11 / ne) * d;
  return kolmogorov_pvalue(lambda);
}

inline double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

// Batch-means standard error of the mean of one autocorrelated series.
inline double batch_means_se(const Eigen::VectorXd& series) {
  const Eigen::Index n = series.size();
  const Eigen::Index b = static_cast<Eigen::Index>(
      std::floor(std::sqrt(static_cast<double>(n))));
  const Eigen::Index a = n / b;
  const double grand = series.head(a * b).mean();
  double var = 0.0;
  for (Eigen::Index k = 0; k < a; ++k) {
    const double mean_k = series.segment(k * b, b).mean();
    var += (mean_k - grand) * (mean_k - grand);
  }
  var *= static_cast<double>(b) / static_cast<double>(a - 1);
  return std::sqrt(var / static_cast<double>(a * b));
}

// Regularized upper incomplete gamma Q(a, x) by series / continued fraction.
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) return 1.0;
  if (x == 0.0) return 1.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    // series for P(a, x)
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return 1.0 - sum * std::exp(-x + a * std::log(x) - gln);
  }
  // continued fraction for Q(a, x)
  double b = x + 1.0 - a;
  double c = 1e308;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return std::exp(-x + a * std::log(x) - gln) * h;
}

// Survival function of the chi-square distribution.
inline double chi_square_sf(double statistic, double dof) {
  return gamma_q(0.5 * dof, 0.5 * statistic);
}

// Symmetry test of a flow-count matrix: statistic sum over unordered pairs
// of (F_ij - F_ji)^2 / (F_ij + F_ji), chi-square with one dof per pair that
// carries any flow.
inline double flow_symmetry_pvalue(const Eigen::MatrixXd& flow) {
  double statistic = 0.0;
  double dof = 0.0;
  for (Eigen::Index i = 0; i < flow.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < flow.cols(); ++j) {
      const double total = flow(i, j) + flow(j, i);
      if (total <= 0.0) continue;
      const double diff = flow(i, j) - flow(j, i);
      statistic += diff * diff / total;
      dof += 1.0;
    }
  }
  if (dof == 0.0) return 1.0;
  return chi_square_sf(statistic, dof);
}

}  // namespace testutil
