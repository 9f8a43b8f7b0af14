#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "agess/cholesky.hpp"
#include "agess/errors.hpp"
#include "agess/rng.hpp"

namespace agess {

// Elliptical families with tractable conditional laws: the multivariate
// Gaussian and the symmetric Pearson type VII class, of which the
// multivariate t is the user-facing special case. Raw Pearson parameters are
// exposed for completeness but the t parameterization is what the samplers
// are tuned around.
//
// A Pearson family is stored as (m, half_nu) with half_nu = M - P, where M is
// the exponent of the joint distribution over (state, auxiliary) pairs in
// dimension 2P. In this form the family is closed under marginalization and
// 1-d restriction: the joint exponent at dimension d is half_nu + d, the
// marginal exponent is half_nu + d/2, and for a t with nu degrees of freedom
// half_nu = nu / 2 at every dimension.
class EllipticalFamily {
 public:
  enum class Kind { Gaussian, StudentT, PearsonVII };

  static EllipticalFamily gaussian() { return EllipticalFamily(Kind::Gaussian, 0.0, 0.0); }

  static EllipticalFamily student_t(double nu) {
    if (!(nu > 2.0)) {
      throw std::invalid_argument("student_t: nu must exceed 2");
    }
    return EllipticalFamily(Kind::StudentT, nu, 0.5 * nu);
  }

  // m and M parameterize the joint distribution of (state, auxiliary) pairs
  // in dimension 2 * dim; M > dim keeps the conditional radial law proper.
  static EllipticalFamily pearson_vii(double m, double joint_m, int dim) {
    if (!(m > 0.0)) throw std::invalid_argument("pearson_vii: m must be positive");
    if (!(joint_m > static_cast<double>(dim))) {
      throw std::invalid_argument("pearson_vii: M must exceed the dimension");
    }
    return EllipticalFamily(Kind::PearsonVII, m, joint_m - static_cast<double>(dim));
  }

  Kind kind() const { return kind_; }
  bool is_gaussian() const { return kind_ == Kind::Gaussian; }

  double m() const { return m_; }
  double half_nu() const { return half_nu_; }
  double nu() const { return 2.0 * half_nu_; }

  double joint_exponent(Eigen::Index dim) const {
    return half_nu_ + static_cast<double>(dim);
  }
  double marginal_exponent(Eigen::Index dim) const {
    return half_nu_ + 0.5 * static_cast<double>(dim);
  }

  std::string name() const {
    switch (kind_) {
      case Kind::Gaussian: return "gaussian";
      case Kind::StudentT: return "student_t(" + std::to_string(nu()) + ")";
      case Kind::PearsonVII: return "pearson_vii";
    }
    return "unknown";
  }

 private:
  EllipticalFamily(Kind kind, double m, double half_nu)
      : kind_(kind), m_(m), half_nu_(half_nu) {}

  Kind kind_;
  double m_;
  double half_nu_;
};

// Mean vector, scale matrix, and its cached lower Cholesky factor.
struct EllipticalParams {
  Eigen::VectorXd mean;
  Eigen::MatrixXd scale;
  Eigen::MatrixXd chol;  // lower triangular, chol * chol^T == scale
  double log_det_scale = 0.0;
  EllipticalFamily family = EllipticalFamily::gaussian();

  EllipticalParams(Eigen::VectorXd mu, Eigen::MatrixXd sigma,
                   EllipticalFamily fam)
      : mean(std::move(mu)), scale(std::move(sigma)), family(fam) {
    if (scale.rows() != scale.cols() || scale.rows() != mean.size()) {
      throw std::invalid_argument("EllipticalParams: dimension mismatch");
    }
    chol = jittered_cholesky(scale);
    log_det_scale = log_det_from_cholesky(chol);
  }

  Eigen::Index dim() const { return mean.size(); }
};

namespace detail {

inline void check_dim(const EllipticalParams& params, const Eigen::VectorXd& x) {
  if (x.size() != params.dim()) {
    throw std::invalid_argument("elliptical: dimension mismatch");
  }
}

}  // namespace detail

// (x - mu)^T Sigma^{-1} (x - mu) via one triangular solve.
inline double quadratic_form(const EllipticalParams& params,
                             const Eigen::VectorXd& x) {
  detail::check_dim(params, x);
  return params.chol.triangularView<Eigen::Lower>()
      .solve(x - params.mean)
      .squaredNorm();
}

// Log of the normalized marginal density in dimension P.
inline double log_density(const EllipticalParams& params,
                          const Eigen::VectorXd& x) {
  const double q = quadratic_form(params, x);
  const double p = static_cast<double>(params.dim());
  if (params.family.is_gaussian()) {
    return -0.5 * (p * std::log(2.0 * std::numbers::pi) +
                   params.log_det_scale + q);
  }
  const double m = params.family.m();
  const double c = params.family.half_nu();
  return std::lgamma(c + 0.5 * p) - std::lgamma(c) -
         0.5 * p * std::log(m * std::numbers::pi) -
         0.5 * params.log_det_scale - (c + 0.5 * p) * std::log1p(q / m);
}

// Draw from the marginal law. Gaussian: mu + L eta. Pearson type VII: the
// marginal is a scaled t with 2 * half_nu degrees of freedom, drawn as
// mu + L eta sqrt(m / chisq_{2 half_nu}); for a t this is the familiar
// mu + L eta sqrt(nu / chisq_nu).
inline Eigen::VectorXd sample_marginal(const EllipticalParams& params,
                                       Rng& rng) {
  Eigen::VectorXd eta = normal_vector(rng, params.dim());
  if (params.family.is_gaussian()) {
    return params.mean + params.chol * eta;
  }
  const double s = chi_square(rng, 2.0 * params.family.half_nu());
  return params.mean +
         params.chol * (eta * std::sqrt(params.family.m() / s));
}

// Draw the auxiliary variable conditionally on the current state, under the
// joint elliptical law over (state, auxiliary) with block-diagonal scale.
// For the Gaussian the conditional equals the marginal. For Pearson type VII
// the radius satisfies R^2 = (m + q_x) B with B ~ BetaPrime(P/2, M - P/2),
// and the direction is uniform on the sphere.
inline Eigen::VectorXd sample_conditional_aux(const EllipticalParams& params,
                                              const Eigen::VectorXd& x,
                                              Rng& rng) {
  if (params.family.is_gaussian()) {
    return sample_marginal(params, rng);
  }
  const double p = static_cast<double>(params.dim());
  const double q = quadratic_form(params, x);
  const double b =
      beta_prime(rng, 0.5 * p, params.family.half_nu() + 0.5 * p);
  const double radius = std::sqrt((params.family.m() + q) * b);
  Eigen::VectorXd u = unit_sphere(rng, params.dim());
  return params.mean + radius * (params.chol * u);
}

// Covariance of the conditional auxiliary law.
inline Eigen::MatrixXd conditional_covariance(const EllipticalParams& params,
                                              const Eigen::VectorXd& x) {
  if (params.family.is_gaussian()) {
    detail::check_dim(params, x);
    return params.scale;
  }
  const double p = static_cast<double>(params.dim());
  const double c = params.family.half_nu();
  if (!(c + 0.5 * p > 1.0)) {
    throw std::domain_error(
        "conditional_covariance: second moment does not exist (M - P/2 <= 1)");
  }
  const double q = quadratic_form(params, x);
  const double factor = (params.family.m() + q) / (2.0 * c + p - 2.0);
  return factor * params.scale;
}

// Scalar versions used by 1-d coordinate updates. The arithmetic mirrors
// the vector path operation for operation, so a sweep over a
// one-dimensional state reproduces the full-dimensional step bit for bit.
namespace scalar {

inline double log_density(const EllipticalFamily& family, double mu,
                          double sigma2, double x) {
  const double sd = std::sqrt(sigma2);
  const double t = (x - mu) / sd;
  const double q = t * t;
  const double log_det = 2.0 * std::log(sd);
  if (family.is_gaussian()) {
    return -0.5 * (std::log(2.0 * std::numbers::pi) + log_det + q);
  }
  const double m = family.m();
  const double c = family.half_nu();
  return std::lgamma(c + 0.5) - std::lgamma(c) -
         0.5 * std::log(m * std::numbers::pi) - 0.5 * log_det -
         (c + 0.5) * std::log1p(q / m);
}

inline double sample_conditional_aux(const EllipticalFamily& family, double mu,
                                     double sigma2, double x, Rng& rng) {
  const double sd = std::sqrt(sigma2);
  if (family.is_gaussian()) {
    return mu + sd * normal(rng);
  }
  const double t = (x - mu) / sd;
  const double q = t * t;
  const double b = beta_prime(rng, 0.5, family.half_nu() + 0.5);
  const double radius = std::sqrt((family.m() + q) * b);
  const double v = normal(rng);
  const double direction = v / std::sqrt(v * v);
  return mu + radius * (sd * direction);
}

}  // namespace scalar

}  // namespace agess
