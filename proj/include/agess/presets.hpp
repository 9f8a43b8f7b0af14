#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "agess/harness.hpp"

namespace agess {

// A preset is a named batch of experiment arms mirroring one of the
// benchmark studies, scaled to desk-size repetition counts. Study constants
// (alpha grid, iteration multipliers, initial scales) follow the published
// protocols; dataset and chain counts are reduced.
struct Preset {
  std::string name;
  std::vector<ExperimentConfig> arms;
};

namespace detail {

inline json agess_sampler(const std::string& family, double sigma0,
                          bool scalar = false) {
  json s{{"name", scalar ? "agess-scalar" : "agess"},
         {"family", family},
         {"sigma0", sigma0}};
  if (family == "student_t") s["nu"] = 6.0;
  return s;
}

inline ExperimentConfig arm(const json& target, const json& sampler,
                            const std::string& label, std::int64_t iterations,
                            std::int64_t burn_in, std::uint64_t seed,
                            const std::string& out_dir, int chains = 2) {
  ExperimentConfig c;
  c.target = target;
  c.sampler = sampler;
  c.label = label;
  c.iterations = iterations;
  c.burn_in = burn_in;
  c.base_seed = seed;
  c.out_dir = out_dir;
  c.chains = chains;
  c.workers = 1;
  return c;
}

}  // namespace detail

// Isotropic Gaussian study: optimal and mismatched fixed ellipses
// (alpha in {0, 1, 9}), the random-walk baseline, and both adaptive variants
// started at 10 I. The reporting window is the final 40%, realized by
// setting burn_in to 0.6 N.
inline Preset preset_fig1(const std::string& out_dir, std::uint64_t seed) {
  Preset preset;
  preset.name = "fig1";
  const std::vector<Eigen::Index> dims{2, 10, 50, 100, 250, 500};
  const std::int64_t n = 100000;
  const std::int64_t burn = 60000;
  std::uint64_t arm_seed = seed;
  for (const Eigen::Index p : dims) {
    const json target{{"name", "gaussian"}, {"dim", p}, {"variance", 1.0}};
    const std::string suffix = "_p" + std::to_string(p);
    for (const double alpha : {0.0, 1.0, 9.0}) {
      json sampler{{"name", "ess"}, {"sigma0", 1.0 + alpha}};
      preset.arms.push_back(detail::arm(
          target, sampler, "ess_alpha" + std::to_string(int(alpha)) + suffix,
          n, burn, ++arm_seed, out_dir));
    }
    preset.arms.push_back(detail::arm(target, json{{"name", "arw"}, {"sigma0", 1.0}},
                                      "arw" + suffix, n, burn, ++arm_seed,
                                      out_dir));
    preset.arms.push_back(detail::arm(target,
                                      detail::agess_sampler("gaussian", 10.0),
                                      "agess_gaussian" + suffix, n, burn,
                                      ++arm_seed, out_dir));
    preset.arms.push_back(detail::arm(target,
                                      detail::agess_sampler("student_t", 10.0),
                                      "agess_t" + suffix, n, burn, ++arm_seed,
                                      out_dir));
  }
  return preset;
}

// Volcano ridge study: the optimal fixed scale (1 + P^{-1/2}) I, the unit
// and doubled scales, the random walk, and both adaptive variants started
// from the poor 2 I scale.
inline Preset preset_volcano(const std::string& out_dir, std::uint64_t seed) {
  Preset preset;
  preset.name = "volcano";
  const std::int64_t n = 100000;
  const std::int64_t burn = 60000;
  std::uint64_t arm_seed = seed;
  for (const Eigen::Index p : {Eigen::Index{10}, Eigen::Index{100}}) {
    const json target{{"name", "volcano"}, {"dim", p}};
    const std::string suffix = "_p" + std::to_string(p);
    const double optimal = 1.0 + 1.0 / std::sqrt(static_cast<double>(p));
    preset.arms.push_back(detail::arm(target, json{{"name", "ess"}, {"sigma0", optimal}},
                                      "ess_optimal" + suffix, n, burn,
                                      ++arm_seed, out_dir));
    preset.arms.push_back(detail::arm(target, json{{"name", "ess"}, {"sigma0", 1.0}},
                                      "ess_unit" + suffix, n, burn, ++arm_seed,
                                      out_dir));
    preset.arms.push_back(detail::arm(target, json{{"name", "ess"}, {"sigma0", 2.0}},
                                      "ess_frozen2" + suffix, n, burn,
                                      ++arm_seed, out_dir));
    preset.arms.push_back(detail::arm(target, json{{"name", "arw"}, {"sigma0", 1.0}},
                                      "arw" + suffix, n, burn, ++arm_seed,
                                      out_dir));
    preset.arms.push_back(detail::arm(target,
                                      detail::agess_sampler("student_t", 2.0),
                                      "agess_t" + suffix, n, burn, ++arm_seed,
                                      out_dir));
    preset.arms.push_back(
        detail::arm(target, detail::agess_sampler("gaussian", 2.0, true),
                    "agess_scalar" + suffix, n, burn, ++arm_seed, out_dir));
  }
  return preset;
}

// Generalized ReLU regression: iterations scale with the covariate count
// (30000 D for the random walk, 10000 D otherwise, 2500 D burn-in).
inline Preset preset_relu(const std::string& out_dir, std::uint64_t seed) {
  Preset preset;
  preset.name = "relu";
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "data");
  std::uint64_t arm_seed = seed;
  const int datasets = 2;
  for (const Eigen::Index d : {Eigen::Index{2}, Eigen::Index{10}, Eigen::Index{50}}) {
    for (int k = 0; k < datasets; ++k) {
      Rng rng = make_rng(seed + 1000 * static_cast<std::uint64_t>(d) +
                         static_cast<std::uint64_t>(k));
      Dataset data = relu_data(1000, d, rng);
      const std::string base = (fs::path(out_dir) / "data" /
                                ("relu_d" + std::to_string(d) + "_" +
                                 std::to_string(k)))
                                   .string();
      save_dataset(data, base);
      const json target{{"name", "relu"}, {"dataset", base}};
      const std::string suffix =
          "_d" + std::to_string(d) + "_" + std::to_string(k);
      const std::int64_t dn = static_cast<std::int64_t>(d);
      preset.arms.push_back(detail::arm(target, json{{"name", "ess"}, {"sigma0", 1.0}},
                                        "ess" + suffix, 10000 * dn, 2500 * dn,
                                        ++arm_seed, out_dir));
      preset.arms.push_back(detail::arm(
          target, detail::agess_sampler("student_t", 1.0), "agess_t" + suffix,
          10000 * dn, 2500 * dn, ++arm_seed, out_dir));
      preset.arms.push_back(detail::arm(target, json{{"name", "arw"}, {"sigma0", 1.0}},
                                        "arw" + suffix, 30000 * dn, 2500 * dn,
                                        ++arm_seed, out_dir));
    }
  }
  return preset;
}

namespace detail {

inline Preset banana_like(const std::string& kind, const std::string& out_dir,
                          std::uint64_t seed, Eigen::Index data_n,
                          std::int64_t iterations, std::int64_t burn) {
  Preset preset;
  preset.name = kind;
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "data");
  std::uint64_t arm_seed = seed;
  const int datasets = 5;
  for (int k = 0; k < datasets; ++k) {
    Rng rng = make_rng(seed + 77 + static_cast<std::uint64_t>(k));
    const double mu1 = 3.0 * normal(rng);
    const double mu2 = 3.0 * normal(rng);
    Eigen::VectorXd y = kind == "banana" ? banana_data(data_n, rng)
                                         : twin_banana_data(data_n, rng);
    Dataset data;
    data.X = Eigen::MatrixXd::Zero(y.size(), 1);
    data.y = y;
    data.meta = {{"model", kind}, {"mu1", mu1}, {"mu2", mu2}, {"n", y.size()}};
    const std::string base =
        (fs::path(out_dir) / "data" / (kind + "_" + std::to_string(k))).string();
    save_dataset(data, base);
    const json target{{"name", kind == "banana" ? "banana" : "twin_banana"},
                      {"dataset", base}};
    const std::string suffix = "_" + std::to_string(k);
    preset.arms.push_back(arm(target, json{{"name", "ess"}, {"sigma0", 4.0}},
                              kind + "_ess" + suffix, iterations, burn,
                              ++arm_seed, out_dir));
    preset.arms.push_back(arm(target, agess_sampler("student_t", 4.0),
                              kind + "_agess_t" + suffix, iterations, burn,
                              ++arm_seed, out_dir));
    preset.arms.push_back(arm(target, json{{"name", "arw"}, {"sigma0", 1.0}},
                              kind + "_arw" + suffix, iterations, burn,
                              ++arm_seed, out_dir));
  }
  return preset;
}

}  // namespace detail

inline Preset preset_banana(const std::string& out_dir, std::uint64_t seed) {
  return detail::banana_like("banana", out_dir, seed, 3, 200000, 100000);
}

inline Preset preset_twinbanana(const std::string& out_dir, std::uint64_t seed) {
  return detail::banana_like("twinbanana", out_dir, seed, 3, 500000, 250000);
}

// Horseshoe regression at desk scale: 20 covariates, 50 observations,
// 4 chains of 300000 iterations on the 42-dimensional log-scale posterior.
inline Preset preset_horseshoe_desk(const std::string& out_dir,
                                    std::uint64_t seed) {
  Preset preset;
  preset.name = "horseshoe-desk";
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "data");
  std::uint64_t arm_seed = seed;
  const int datasets = 2;
  for (int k = 0; k < datasets; ++k) {
    Rng rng = make_rng(seed + 31 + static_cast<std::uint64_t>(k));
    Dataset data = horseshoe_data(50, 20, rng);
    const std::string base =
        (fs::path(out_dir) / "data" / ("horseshoe_" + std::to_string(k))).string();
    save_dataset(data, base);
    const json target{{"name", "horseshoe"}, {"dataset", base}};
    ExperimentConfig c = detail::arm(
        target, detail::agess_sampler("student_t", 1.0),
        "horseshoe_agess_" + std::to_string(k), 300000, 100000, ++arm_seed,
        out_dir, 4);
    preset.arms.push_back(c);
  }
  return preset;
}

// Deep Gaussian process surrogate smoke study: 50-point grid, 53-dimensional
// posterior, three chains with random lengthscale initializations and the
// hidden layer started at the inputs.
inline Preset preset_deepgp(const std::string& out_dir, std::uint64_t seed) {
  Preset preset;
  preset.name = "deepgp";
  const json target{{"name", "deepgp"}};
  json sampler = detail::agess_sampler("student_t", 1.0);
  sampler["random_init_coords"] = {50, 51, 52};
  sampler["random_init_sd"] = 1.0;
  ExperimentConfig c = detail::arm(target, sampler, "deepgp_agess", 50000,
                                   25000, seed + 1, out_dir, 3);
  preset.arms.push_back(c);
  return preset;
}

inline Preset build_preset(const std::string& name, const std::string& out_dir,
                           std::uint64_t seed) {
  if (name == "fig1") return preset_fig1(out_dir, seed);
  if (name == "volcano") return preset_volcano(out_dir, seed);
  if (name == "relu") return preset_relu(out_dir, seed);
  if (name == "banana") return preset_banana(out_dir, seed);
  if (name == "twinbanana") return preset_twinbanana(out_dir, seed);
  if (name == "horseshoe-desk") return preset_horseshoe_desk(out_dir, seed);
  if (name == "deepgp") return preset_deepgp(out_dir, seed);
  throw ConfigError("preset: unknown name '" + name + "'");
}

// Runs every arm and writes a comparison table over the preset.
inline json run_preset(const Preset& preset, int workers) {
  json table = json::array();
  for (ExperimentConfig arm : preset.arms) {
    arm.workers = workers;
    json summary = run_experiment(arm);
    json row;
    row["arm"] = arm.resolved_label();
    row["mess_total"] = summary.value("mess_total", 0.0);
    row["mess_per_second_total"] = summary.value("mess_per_second_total", 0.0);
    row["mean_loop_count"] = summary.value("mean_loop_count", 0.0);
    if (summary.contains("gelman_rubin")) {
      row["gelman_rubin"] = summary["gelman_rubin"];
    }
    table.push_back(row);
  }
  namespace fs = std::filesystem;
  const fs::path dir = preset.arms.empty()
                           ? fs::path(".")
                           : fs::path(preset.arms.front().out_dir);
  std::ofstream(dir / (preset.name + "_table.json")) << table.dump(2) << "\n";
  std::ofstream csv(dir / (preset.name + "_table.csv"));
  csv << "arm,mess_total,mess_per_second_total,mean_loop_count,gelman_rubin\n";
  for (const auto& row : table) {
    csv << row.value("arm", "") << "," << row.value("mess_total", 0.0) << ","
        << row.value("mess_per_second_total", 0.0) << ","
        << row.value("mean_loop_count", 0.0) << ","
        << (row.contains("gelman_rubin")
                ? std::to_string(row["gelman_rubin"].get<double>())
                : "")
        << "\n";
  }
  return table;
}

}  // namespace agess
