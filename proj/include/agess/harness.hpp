#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "agess/adaptation.hpp"
#include "agess/diagnostics.hpp"
#include "agess/errors.hpp"
#include "agess/targets.hpp"

namespace agess {

using nlohmann::json;

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

struct ExperimentConfig {
  json target;   // {"name": ..., parameters or "dataset" path}
  json sampler;  // {"name": "ess"|"agess"|"agess-scalar"|"arw", ...}
  int chains = 2;
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 1000;
  std::uint64_t base_seed = 0;
  int workers = 1;
  std::string out_dir = "out";
  std::string label;  // subdirectory name; defaults to target/sampler names

  static ExperimentConfig from_json(const json& j) {
    ExperimentConfig c;
    if (!j.contains("target") || !j.contains("sampler")) {
      throw ConfigError("config: requires 'target' and 'sampler' objects");
    }
    c.target = j.at("target");
    c.sampler = j.at("sampler");
    c.chains = j.value("chains", 2);
    c.iterations = j.value("iterations", std::int64_t{10000});
    c.burn_in = j.value("burn_in", std::int64_t{1000});
    c.base_seed = j.value("base_seed", std::uint64_t{0});
    c.workers = j.value("workers", 1);
    c.out_dir = j.value("out_dir", std::string("out"));
    c.label = j.value("label", std::string());
    c.validate();
    return c;
  }

  json to_json() const {
    return json{{"target", target},     {"sampler", sampler},
                {"chains", chains},     {"iterations", iterations},
                {"burn_in", burn_in},   {"base_seed", base_seed},
                {"workers", workers},   {"out_dir", out_dir},
                {"label", label}};
  }

  void validate() const {
    if (chains < 1) throw ConfigError("config: chains must be >= 1");
    if (iterations <= burn_in || burn_in < 0) {
      throw ConfigError("config: need iterations > burn_in >= 0");
    }
    if (workers < 1) throw ConfigError("config: workers must be >= 1");
    if (!sampler.contains("name")) throw ConfigError("config: sampler.name missing");
    const std::string name = sampler.at("name");
    if (name != "ess" && name != "agess" && name != "agess-scalar" &&
        name != "arw") {
      throw ConfigError("config: unknown sampler '" + name + "'");
    }
    if (target.contains("dataset")) {
      const std::string base = target.at("dataset");
      if (!std::filesystem::exists(base + ".csv")) {
        throw ConfigError("config: dataset file not found: " + base + ".csv");
      }
    }
  }

  std::string resolved_label() const {
    if (!label.empty()) return label;
    return std::string(target.value("name", "target")) + "_" +
           std::string(sampler.value("name", "sampler"));
  }
};

// ---------------------------------------------------------------------------
// target construction
// ---------------------------------------------------------------------------

struct BuiltTarget {
  TargetDensity target;
  Eigen::VectorXd default_init;
};

inline BuiltTarget build_target(const json& spec) {
  const std::string name = spec.value("name", "");
  if (name == "gaussian") {
    const Eigen::Index dim = spec.value("dim", 1);
    const double variance = spec.value("variance", 1.0);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    if (spec.contains("mean")) {
      if (spec.at("mean").is_number()) {
        mean.setConstant(spec.at("mean").get<double>());
      } else {
        const auto values = spec.at("mean").get<std::vector<double>>();
        mean = Eigen::Map<const Eigen::VectorXd>(values.data(), dim);
      }
    }
    Eigen::MatrixXd sigma = variance * Eigen::MatrixXd::Identity(dim, dim);
    if (spec.contains("sigma_diag")) {
      const auto values = spec.at("sigma_diag").get<std::vector<double>>();
      sigma = Eigen::Map<const Eigen::VectorXd>(values.data(), dim).asDiagonal();
    }
    return BuiltTarget{gaussian_target(mean, sigma), mean};
  }
  if (name == "volcano") {
    const Eigen::Index dim = spec.value("dim", 2);
    return BuiltTarget{volcano_target(dim), Eigen::VectorXd::Zero(dim)};
  }
  if (name == "banana" || name == "twin_banana") {
    Eigen::VectorXd y;
    double mu1 = 0.0;
    double mu2 = 0.0;
    if (spec.contains("dataset")) {
      Dataset data = load_dataset(spec.at("dataset"));
      y = data.y;
      mu1 = data.meta.value("mu1", 0.0);
      mu2 = data.meta.value("mu2", 0.0);
    } else {
      const auto values = spec.at("y").get<std::vector<double>>();
      y = Eigen::Map<const Eigen::VectorXd>(
          values.data(), static_cast<Eigen::Index>(values.size()));
      mu1 = spec.value("mu1", 0.0);
      mu2 = spec.value("mu2", 0.0);
    }
    TargetDensity t = name == "banana" ? banana_target(y, mu1, mu2)
                                       : twin_banana_target(y, mu1, mu2);
    return BuiltTarget{std::move(t), Eigen::VectorXd::Zero(2)};
  }
  if (name == "relu") {
    Dataset data = load_dataset(spec.at("dataset"));
    return BuiltTarget{relu_regression_target(data),
                       Eigen::VectorXd::Zero(data.d())};
  }
  if (name == "horseshoe") {
    Dataset data = load_dataset(spec.at("dataset"));
    return BuiltTarget{horseshoe_target(data),
                       Eigen::VectorXd::Zero(2 * data.d() + 2)};
  }
  if (name == "deepgp") {
    Dataset data = spec.contains("dataset")
                       ? load_dataset(spec.at("dataset"))
                       : deep_gp_data();
    const double g_w = spec.value("g_w", 1e-8);
    const double g_y = spec.value("g_y", 1e-8);
    const double nu = spec.value("nu", 6.0);
    TargetDensity t = deep_gp_target(data.X.col(0), data.y, g_w, g_y, nu);
    Eigen::VectorXd init = Eigen::VectorXd::Zero(data.n() + 3);
    init.head(data.n()) = data.X.col(0);  // hidden layer starts at the inputs
    return BuiltTarget{std::move(t), std::move(init)};
  }
  throw ConfigError("config: unknown target '" + name + "'");
}

// ---------------------------------------------------------------------------
// chain execution
// ---------------------------------------------------------------------------

namespace detail {

inline Eigen::VectorXd vector_from_spec(const json& sampler, const char* key,
                                        const Eigen::VectorXd& fallback) {
  if (!sampler.contains(key)) return fallback;
  const json& v = sampler.at(key);
  if (v.is_number()) {
    return Eigen::VectorXd::Constant(fallback.size(), v.get<double>());
  }
  const auto values = v.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != fallback.size()) {
    throw ConfigError(std::string("config: bad length for ") + key);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), fallback.size());
}

inline Eigen::MatrixXd matrix_from_spec(const json& sampler, const char* key,
                                        Eigen::Index dim) {
  if (!sampler.contains(key)) return Eigen::MatrixXd::Identity(dim, dim);
  const json& v = sampler.at(key);
  if (v.is_number()) {
    return v.get<double>() * Eigen::MatrixXd::Identity(dim, dim);
  }
  const auto values = v.get<std::vector<double>>();
  if (static_cast<Eigen::Index>(values.size()) != dim) {
    throw ConfigError(std::string("config: bad length for ") + key);
  }
  return Eigen::Map<const Eigen::VectorXd>(values.data(), dim).asDiagonal();
}

inline EllipticalFamily family_from_spec(const json& sampler, Eigen::Index dim) {
  const std::string family = sampler.value("family", "student_t");
  if (family == "gaussian") return EllipticalFamily::gaussian();
  if (family == "student_t") {
    return EllipticalFamily::student_t(sampler.value("nu", 6.0));
  }
  if (family == "pearson_vii") {
    return EllipticalFamily::pearson_vii(sampler.at("m").get<double>(),
                                         sampler.at("M").get<double>(),
                                         static_cast<int>(dim));
  }
  throw ConfigError("config: unknown family '" + family + "'");
}

}  // namespace detail

// Runs one chain of the configured sampler. Everything is determined by the
// config and the chain's derived seed.
inline Trace run_chain(const ExperimentConfig& config,
                       const TargetDensity& target,
                       const Eigen::VectorXd& default_init, int chain_index) {
  const Eigen::Index dim = target.dim();
  const std::uint64_t seed = chain_seed(config.base_seed,
                                        static_cast<std::uint64_t>(chain_index));
  const json& sampler = config.sampler;
  const std::string name = sampler.at("name");

  Eigen::VectorXd init =
      detail::vector_from_spec(sampler, "init", default_init);
  if (sampler.contains("random_init_coords")) {
    // Per-chain random restarts of selected coordinates, drawn from the
    // third derived stream so kernel and driver streams stay untouched.
    std::uint64_t s = seed;
    splitmix64(s);
    splitmix64(s);
    Rng init_rng(splitmix64(s));
    const double sd = sampler.value("random_init_sd", 1.0);
    for (const auto& idx : sampler.at("random_init_coords")) {
      init[idx.get<Eigen::Index>()] = sd * normal(init_rng);
    }
  }

  const Eigen::VectorXd mu0 = detail::vector_from_spec(sampler, "mu0", init);
  const Eigen::MatrixXd sigma0 = detail::matrix_from_spec(sampler, "sigma0", dim);
  const int shrink_max_iter = sampler.value("shrink_max_iter", 10000);

  if (name == "ess") {
    EllipticalParams prior(mu0, sigma0, EllipticalFamily::gaussian());
    return run_fixed_ess(target, prior, config.iterations, config.burn_in,
                         seed, init, shrink_max_iter);
  }
  if (name == "arw") {
    return run_arw(target, init, sigma0, config.iterations, config.burn_in,
                   seed);
  }

  AdaptConfig adapt;
  adapt.beta = sampler.value("beta", 0.5);
  adapt.eps_a = sampler.value("eps_a", -1.0);
  adapt.eps_b = sampler.value("eps_b", 0.05);
  adapt.burn_1d_fraction = sampler.value("burn_1d_fraction", 0.1);
  adapt.iterations = config.iterations;
  adapt.burn_in = config.burn_in;
  adapt.seed = seed;
  adapt.adapt = sampler.value("adapt", true);
  adapt.shrink_max_iter = shrink_max_iter;
  adapt.variant = name == "agess-scalar" ? AdaptVariant::ScalarScale
                                         : AdaptVariant::FullCovariance;

  const EllipticalFamily family = detail::family_from_spec(sampler, dim);
  return run_agess(target, SupportTransform::identity(dim), family, mu0,
                   sigma0, adapt, init);
}

// ---------------------------------------------------------------------------
// trace CSV round trip
// ---------------------------------------------------------------------------

inline void write_trace_csv(const std::string& path, const Trace& trace) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw ConfigError("write_trace_csv: cannot open " + path);
  std::fputs("iter", f);
  for (Eigen::Index c = 0; c < trace.dim(); ++c) {
    std::fprintf(f, ",x_%lld", static_cast<long long>(c + 1));
  }
  std::fputs(",loop_count,kernel_tag\n", f);
  for (Eigen::Index i = 0; i < trace.iterations(); ++i) {
    std::fprintf(f, "%lld", static_cast<long long>(i + 1));
    for (Eigen::Index c = 0; c < trace.dim(); ++c) {
      std::fprintf(f, ",%.17g", trace.states(i, c));
    }
    const char* tag =
        i == 0 ? "init" : kernel_tag_name(trace.kernel_tags[static_cast<std::size_t>(i)]);
    std::fprintf(f, ",%d,%s\n", trace.loop_counts[static_cast<std::size_t>(i)],
                 tag);
  }
  std::fclose(f);
}

inline Trace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("read_trace_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("read_trace_csv: empty file");
  const Eigen::Index cols = static_cast<Eigen::Index>(
      std::count(line.begin(), line.end(), ',') + 1);
  const Eigen::Index dim = cols - 3;
  if (dim < 1) throw ConfigError("read_trace_csv: malformed header");

  std::vector<double> states;
  std::vector<int> loops;
  std::vector<KernelTag> tags;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');  // iter
    for (Eigen::Index c = 0; c < dim; ++c) {
      std::getline(ss, cell, ',');
      states.push_back(std::stod(cell));
    }
    std::getline(ss, cell, ',');
    loops.push_back(std::stoi(cell));
    std::getline(ss, cell, ',');
    KernelTag tag = KernelTag::AdaptiveFull;
    if (cell == "non_adaptive_full") tag = KernelTag::NonAdaptiveFull;
    else if (cell == "coord_sweep") tag = KernelTag::CoordSweep;
    else if (cell == "arw") tag = KernelTag::Arw;
    tags.push_back(tag);
  }
  Trace trace;
  const Eigen::Index rows = static_cast<Eigen::Index>(loops.size());
  trace.states = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic,
                                                Eigen::Dynamic, Eigen::RowMajor>>(
      states.data(), rows, dim);
  trace.loop_counts = std::move(loops);
  trace.kernel_tags = std::move(tags);
  return trace;
}

// ---------------------------------------------------------------------------
// experiment runner
// ---------------------------------------------------------------------------

// Runs all chains of one experiment, writes per-chain trace CSVs and report
// JSONs plus a pooled summary. Chains are independent tasks bounded by the
// worker count; outputs depend only on (config, base_seed, chain index).
inline json run_experiment(const ExperimentConfig& config) {
  config.validate();
  BuiltTarget built = build_target(config.target);

  namespace fs = std::filesystem;
  const fs::path dir = fs::path(config.out_dir) / config.resolved_label();
  fs::create_directories(dir);

  std::vector<Trace> traces(static_cast<std::size_t>(config.chains));
  std::vector<std::string> failures(static_cast<std::size_t>(config.chains));
  std::atomic<int> next{0};
  std::mutex io_mutex;

  const auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= config.chains) return;
      try {
        TargetDensity chain_target = built.target.fork();
        Trace trace = run_chain(config, chain_target, built.default_init, c);
        traces[static_cast<std::size_t>(c)] = std::move(trace);
      } catch (const ChainAbort& err) {
        std::lock_guard<std::mutex> lock(io_mutex);
        failures[static_cast<std::size_t>(c)] = err.what();
        traces[static_cast<std::size_t>(c)] = err.partial;
      } catch (const std::exception& err) {
        std::lock_guard<std::mutex> lock(io_mutex);
        failures[static_cast<std::size_t>(c)] = err.what();
      }
    }
  };

  const int pool = std::min(config.workers, config.chains);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<std::size_t>(pool));
  for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // Persist whatever was produced, even on failure.
  json chain_reports = json::array();
  std::uint64_t total_evals = 0;
  std::int64_t total_iterations = 0;
  double loop_sum = 0.0;
  for (int c = 0; c < config.chains; ++c) {
    const Trace& trace = traces[static_cast<std::size_t>(c)];
    if (trace.iterations() == 0) continue;
    const std::string stem = "chain_" + std::to_string(c);
    write_trace_csv((dir / (stem + ".csv")).string(), trace);
    DiagnosticsReport report;
    bool report_ok = true;
    try {
      report = report_for_trace(trace);
    } catch (const std::exception&) {
      report_ok = false;
    }
    json rj = report_ok ? report.to_json() : json{{"error", "diagnostics failed"}};
    rj["chain"] = c;
    rj["seed"] = chain_seed(config.base_seed, static_cast<std::uint64_t>(c));
    rj["burn_seconds"] = trace.timings.burn_seconds;
    rj["sampling_seconds"] = trace.timings.sampling_seconds;
    std::ofstream(dir / (stem + "_report.json")) << rj.dump(2) << "\n";
    chain_reports.push_back(rj);
    total_evals += trace.density_evals;
    total_iterations += trace.iterations();
    loop_sum += trace.mean_loop_count();
  }

  bool failed = false;
  json errors = json::array();
  for (int c = 0; c < config.chains; ++c) {
    if (!failures[static_cast<std::size_t>(c)].empty()) {
      failed = true;
      errors.push_back(
          {{"chain", c}, {"error", failures[static_cast<std::size_t>(c)]}});
    }
  }
  if (failed) {
    json error_doc{{"status", "aborted"},
                   {"errors", errors},
                   {"config", config.to_json()}};
    std::ofstream(dir / "error.json") << error_doc.dump(2) << "\n";
    throw SamplingError("run_experiment: chain abort, see " +
                        (dir / "error.json").string());
  }

  json summary;
  summary["config"] = config.to_json();
  summary["chains"] = chain_reports;
  summary["total_iterations"] = total_iterations;
  summary["total_density_evals"] = total_evals;
  summary["mean_loop_count"] =
      loop_sum / static_cast<double>(config.chains);

  double mess_sum = 0.0;
  double mess_per_second_sum = 0.0;
  for (const auto& rj : chain_reports) {
    mess_sum += rj.value("mess", 0.0);
    mess_per_second_sum += rj.value("mess_per_second", 0.0);
  }
  summary["mess_total"] = mess_sum;
  summary["mess_per_second_total"] = mess_per_second_sum;

  if (config.chains >= 2) {
    std::vector<Eigen::MatrixXd> windows;
    windows.reserve(static_cast<std::size_t>(config.chains));
    for (const auto& trace : traces) windows.push_back(trace.sampling_states());
    try {
      summary["gelman_rubin"] = gelman_rubin(windows);
    } catch (const DiagnosticsError& err) {
      summary["gelman_rubin_error"] = err.what();
    }
  }

  std::ofstream(dir / "summary.json") << summary.dump(2) << "\n";
  return summary;
}

// Recompute reports from trace CSVs (burn-in and timings are not stored in
// the CSV, so the window covers the whole trace and no rate is reported).
inline json diagnose_traces(const std::vector<std::string>& paths) {
  if (paths.empty()) throw ConfigError("diagnose: no trace files matched");
  json out;
  json reports = json::array();
  std::vector<Eigen::MatrixXd> windows;
  for (const auto& path : paths) {
    Trace trace = read_trace_csv(path);
    DiagnosticsReport report;
    try {
      report = report_for_trace(trace);
    } catch (const std::exception& err) {
      throw DiagnosticsError(std::string("diagnose: ") + err.what() + " in " +
                             path);
    }
    json rj = report.to_json();
    rj["trace"] = path;
    reports.push_back(rj);
    windows.push_back(trace.states);
  }
  out["traces"] = reports;
  if (windows.size() >= 2) {
    bool equal = true;
    for (const auto& w : windows) {
      if (w.rows() != windows.front().rows() ||
          w.cols() != windows.front().cols()) {
        equal = false;
      }
    }
    if (!equal) throw DiagnosticsError("diagnose: traces have unequal shapes");
    out["gelman_rubin"] = gelman_rubin(windows);
  }
  return out;
}

}  // namespace agess
