#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <utility>

#include <Eigen/Core>

namespace agess {

using Rng = std::mt19937_64;

// One step of SplitMix64; used to spread user seeds into independent streams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  return Rng(splitmix64(s));
}

// Kernel randomness and driver-level choices (kernel mixtures, blocking) come
// from separate streams, so degenerate driver settings reproduce a bare kernel
// loop word for word.
struct StreamPair {
  Rng kernel;
  Rng driver;
};

inline StreamPair make_streams(std::uint64_t seed) {
  std::uint64_t s = seed;
  const std::uint64_t a = splitmix64(s);
  const std::uint64_t b = splitmix64(s);
  return StreamPair{Rng(a), Rng(b)};
}

inline std::uint64_t chain_seed(std::uint64_t base_seed, std::uint64_t chain_index) {
  std::uint64_t s = base_seed ^ chain_index;
  return splitmix64(s);
}

// Uniform on [0, 1) with 53-bit resolution.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform on (0, 1); an exact zero is remapped so log() stays finite.
inline double uniform01_pos(Rng& rng) {
  const double u = uniform01(rng);
  return u > 0.0 ? u : std::numeric_limits<double>::min();
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller without the usual pair cache: every draw consumes exactly two
// engine words, which keeps stream alignment between different kernel code
// paths exact.
inline double normal(Rng& rng) {
  const double u1 = uniform01_pos(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

inline Eigen::VectorXd normal_vector(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

// Marsaglia-Tsang squeeze method; shapes below one use the standard
// Gamma(a+1) boost.
inline double gamma_draw(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double g = gamma_draw(rng, shape + 1.0);
    return g * std::pow(uniform01_pos(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01_pos(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double chi_square(Rng& rng, double dof) {
  return 2.0 * gamma_draw(rng, 0.5 * dof);
}

// Beta prime (Beta type II) as a ratio of independent gammas.
inline double beta_prime(Rng& rng, double a, double b) {
  const double g1 = gamma_draw(rng, a);
  const double g2 = gamma_draw(rng, b);
  return g1 / g2;
}

// Uniform direction on the unit sphere via a normalized Gaussian vector.
inline Eigen::VectorXd unit_sphere(Rng& rng, Eigen::Index n) {
  for (;;) {
    Eigen::VectorXd v = normal_vector(rng, n);
    const double norm = v.norm();
    if (norm > 0.0) return v / norm;
  }
}

}  // namespace agess
