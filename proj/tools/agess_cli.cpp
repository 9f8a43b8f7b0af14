// Experiment runner: configure a target and sampler, run seeded multi-chain
// experiments or one of the preset studies, and emit traces, reports, and
// comparison tables.

#include <cstdlib>
#include <fstream>
#include <glob.h>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "agess/agess.hpp"

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitSamplingAbort = 3;
constexpr int kExitDiagnosticsFailure = 4;

std::string default_out_dir() {
  const char* env = std::getenv("AGESS_OUT");
  return env != nullptr ? std::string(env) : std::string("out");
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  glob_t result;
  std::vector<std::string> paths;
  if (glob(pattern.c_str(), GLOB_TILDE, nullptr, &result) == 0) {
    for (std::size_t i = 0; i < result.gl_pathc; ++i) {
      paths.emplace_back(result.gl_pathv[i]);
    }
  }
  globfree(&result);
  return paths;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive generalized elliptical slice sampling harness"};
  app.require_subcommand(1);

  // run --config file [--seed S] [--chains C] [--workers W] [--out DIR]
  auto* run = app.add_subcommand("run", "run an experiment from a JSON config");
  std::string config_path;
  std::uint64_t seed_override = 0;
  int chains_override = 0;
  int workers_override = 0;
  std::string out_override;
  run->add_option("--config", config_path, "experiment config JSON")->required();
  auto* seed_opt = run->add_option("--seed", seed_override, "base seed override");
  auto* chains_opt = run->add_option("--chains", chains_override, "chain count override");
  auto* workers_opt = run->add_option("--workers", workers_override, "worker count override");
  auto* out_opt = run->add_option("--out", out_override, "output directory override");

  // preset <name> [--out DIR]
  auto* preset_cmd = app.add_subcommand("preset", "run a named preset study");
  std::string preset_name;
  std::string preset_out = default_out_dir();
  std::uint64_t preset_seed = 20240901;
  int preset_workers = 2;
  bool dry_run = false;
  preset_cmd->add_option("name", preset_name, "preset name")->required();
  preset_cmd->add_option("--out", preset_out, "output directory");
  preset_cmd->add_option("--seed", preset_seed, "base seed");
  preset_cmd->add_option("--workers", preset_workers, "workers per arm");
  preset_cmd->add_flag("--dry-run", dry_run, "write arm configs without running");

  // diagnose --traces <glob>
  auto* diagnose_cmd = app.add_subcommand("diagnose", "recompute reports from trace CSVs");
  std::string traces_glob;
  diagnose_cmd->add_option("--traces", traces_glob, "glob of trace CSV files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      std::ifstream in(config_path);
      if (!in) throw agess::ConfigError("cannot open config: " + config_path);
      nlohmann::json doc;
      in >> doc;
      agess::ExperimentConfig config = agess::ExperimentConfig::from_json(doc);
      if (seed_opt->count() > 0) config.base_seed = seed_override;
      if (chains_opt->count() > 0) config.chains = chains_override;
      if (workers_opt->count() > 0) config.workers = workers_override;
      if (out_opt->count() > 0) config.out_dir = out_override;
      if (config.out_dir.empty()) config.out_dir = default_out_dir();
      nlohmann::json summary = agess::run_experiment(config);
      std::cout << summary.dump(2) << "\n";
      return 0;
    }
    if (*preset_cmd) {
      agess::Preset preset =
          agess::build_preset(preset_name, preset_out, preset_seed);
      if (dry_run) {
        nlohmann::json arms = nlohmann::json::array();
        for (const auto& arm : preset.arms) arms.push_back(arm.to_json());
        std::filesystem::create_directories(preset_out);
        std::ofstream(std::filesystem::path(preset_out) /
                      (preset.name + "_arms.json"))
            << arms.dump(2) << "\n";
        std::cout << arms.dump(2) << "\n";
        return 0;
      }
      nlohmann::json table = agess::run_preset(preset, preset_workers);
      std::cout << table.dump(2) << "\n";
      return 0;
    }
    if (*diagnose_cmd) {
      nlohmann::json report = agess::diagnose_traces(expand_glob(traces_glob));
      std::cout << report.dump(2) << "\n";
      return 0;
    }
  } catch (const agess::ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfigError;
  } catch (const agess::SamplingError& err) {
    std::cerr << "sampling abort: " << err.what() << "\n";
    return kExitSamplingAbort;
  } catch (const agess::DiagnosticsError& err) {
    std::cerr << "diagnostics failure: " << err.what() << "\n";
    return kExitDiagnosticsFailure;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitConfigError;
  }
  return 0;
}
