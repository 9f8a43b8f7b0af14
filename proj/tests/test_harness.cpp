#include "agess/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "agess/presets.hpp"
#include "test_util.hpp"

using namespace agess;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

ExperimentConfig small_ess_config(const std::string& out_dir) {
  ExperimentConfig config;
  config.target = {{"name", "gaussian"}, {"dim", 2}, {"variance", 1.0}};
  config.sampler = {{"name", "ess"}, {"sigma0", 1.0}};
  config.chains = 2;
  config.iterations = 10000;
  config.burn_in = 1000;
  config.base_seed = 4321;
  config.workers = 2;
  config.out_dir = out_dir;
  config.label = "smoke";
  return config;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST(Config, JsonRoundTripAndValidation) {
  ExperimentConfig config = small_ess_config("/tmp/agess_cfg");
  const json j = config.to_json();
  ExperimentConfig parsed = ExperimentConfig::from_json(j);
  EXPECT_EQ(parsed.chains, config.chains);
  EXPECT_EQ(parsed.iterations, config.iterations);
  EXPECT_EQ(parsed.base_seed, config.base_seed);

  json bad = j;
  bad["sampler"]["name"] = "imaginary";
  EXPECT_THROW(ExperimentConfig::from_json(bad), ConfigError);
  bad = j;
  bad["burn_in"] = 20000;
  EXPECT_THROW(ExperimentConfig::from_json(bad), ConfigError);
}

TEST(Config, MissingDatasetFailsBeforeSampling) {
  ExperimentConfig config = small_ess_config("/tmp/agess_cfg");
  config.target = {{"name", "relu"}, {"dataset", "/tmp/definitely_missing"}};
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(RunExperiment, SmokeProducesArtifactsAndConvergedChains) {
  TempDir dir("agess_harness_smoke");
  ExperimentConfig config = small_ess_config(dir.path.string());
  const json summary = run_experiment(config);

  EXPECT_TRUE(fs::exists(dir.path / "smoke" / "chain_0.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "smoke" / "chain_1.csv"));
  EXPECT_TRUE(fs::exists(dir.path / "smoke" / "chain_0_report.json"));
  EXPECT_TRUE(fs::exists(dir.path / "smoke" / "summary.json"));

  EXPECT_LT(summary.at("gelman_rubin").get<double>(), 1.05);

  // Summary totals equal sums over per-chain reports.
  std::int64_t iter_sum = 0;
  std::uint64_t eval_sum = 0;
  for (const auto& chain : summary.at("chains")) {
    iter_sum += chain.at("iterations").get<std::int64_t>();
    eval_sum += chain.at("density_evals").get<std::uint64_t>();
  }
  EXPECT_EQ(summary.at("total_iterations").get<std::int64_t>(), iter_sum);
  EXPECT_EQ(summary.at("total_density_evals").get<std::uint64_t>(), eval_sum);
}

TEST(RunExperiment, RerunsAreByteIdentical) {
  TempDir dir_a("agess_harness_rep_a");
  TempDir dir_b("agess_harness_rep_b");
  ExperimentConfig config = small_ess_config(dir_a.path.string());
  config.iterations = 5000;
  run_experiment(config);
  config.out_dir = dir_b.path.string();
  config.workers = 1;  // parallelism must not affect the artifacts
  run_experiment(config);
  for (const char* name : {"chain_0.csv", "chain_1.csv"}) {
    EXPECT_EQ(read_file(dir_a.path / "smoke" / name),
              read_file(dir_b.path / "smoke" / name))
        << name;
  }
}

TEST(RunExperiment, ChainAbortWritesErrorDocumentAndThrows) {
  TempDir dir("agess_harness_abort");
  ExperimentConfig config = small_ess_config(dir.path.string());
  // A pinprick target under a huge working scale wedges the shrinkage loop.
  config.target = {{"name", "gaussian"}, {"dim", 2}, {"variance", 1e-12}};
  config.sampler = {{"name", "agess"},
                    {"family", "gaussian"},
                    {"sigma0", 1e6},
                    {"adapt", false},
                    {"eps_a", 0.0},
                    {"eps_b", 0.0},
                    {"shrink_max_iter", 3}};
  config.label = "abort";
  EXPECT_THROW(run_experiment(config), SamplingError);
  EXPECT_TRUE(fs::exists(dir.path / "abort" / "error.json"));
}

TEST(TraceCsv, RoundTripPreservesStatesAndTags) {
  Rng rng = make_rng(71);
  Trace trace;
  trace.states.resize(50, 3);
  for (Eigen::Index i = 0; i < 50; ++i) {
    trace.states.row(i) = normal_vector(rng, 3).transpose();
  }
  trace.loop_counts.assign(50, 4);
  trace.loop_counts[0] = 0;
  trace.kernel_tags.assign(50, KernelTag::AdaptiveFull);
  trace.kernel_tags[7] = KernelTag::CoordSweep;
  trace.kernel_tags[9] = KernelTag::NonAdaptiveFull;

  const std::string path = "/tmp/agess_trace_roundtrip.csv";
  write_trace_csv(path, trace);
  const Trace loaded = read_trace_csv(path);
  ASSERT_EQ(loaded.states.rows(), 50);
  ASSERT_EQ(loaded.states.cols(), 3);
  EXPECT_TRUE(loaded.states.isApprox(trace.states, 0.0));  // 17 digits
  EXPECT_EQ(loaded.kernel_tags[7], KernelTag::CoordSweep);
  EXPECT_EQ(loaded.kernel_tags[9], KernelTag::NonAdaptiveFull);
  EXPECT_EQ(loaded.loop_counts[3], 4);
  std::remove(path.c_str());
}

TEST(Diagnose, RecomputesReportsFromCsvFiles) {
  TempDir dir("agess_harness_diag");
  ExperimentConfig config = small_ess_config(dir.path.string());
  config.iterations = 4000;
  run_experiment(config);
  const json report = diagnose_traces({
      (dir.path / "smoke" / "chain_0.csv").string(),
      (dir.path / "smoke" / "chain_1.csv").string(),
  });
  EXPECT_EQ(report.at("traces").size(), 2u);
  EXPECT_GT(report.at("traces")[0].at("mess").get<double>(), 1000.0);
  EXPECT_LT(report.at("gelman_rubin").get<double>(), 1.05);
  EXPECT_THROW(diagnose_traces({}), ConfigError);
}

TEST(RunChain, DeepGpRandomInitsDifferPerChain) {
  ExperimentConfig config;
  config.target = {{"name", "deepgp"}};
  config.sampler = {{"name", "agess"},
                    {"family", "student_t"},
                    {"sigma0", 1.0},
                    {"random_init_coords", {50, 51, 52}},
                    {"random_init_sd", 1.0}};
  config.iterations = 50;
  config.burn_in = 0;
  config.base_seed = 10;
  BuiltTarget built = build_target(config.target);
  const Trace a = run_chain(config, built.target, built.default_init, 0);
  const Trace b = run_chain(config, built.target, built.default_init, 1);
  EXPECT_NE(a.states(0, 50), b.states(0, 50));
  // Hidden layer starts at the inputs for both chains.
  EXPECT_DOUBLE_EQ(a.states(0, 0), b.states(0, 0));
}

TEST(Presets, PaperConstantsSurviveInArms) {
  const Preset fig1 = preset_fig1("/tmp/agess_preset_unused", 1);
  bool has_alpha9_p100 = false;
  for (const auto& arm : fig1.arms) {
    if (arm.label == "ess_alpha9_p100") {
      has_alpha9_p100 = true;
      EXPECT_DOUBLE_EQ(arm.sampler.at("sigma0").get<double>(), 10.0);
    }
    if (arm.label == "agess_t_p100") {
      EXPECT_DOUBLE_EQ(arm.sampler.at("sigma0").get<double>(), 10.0);
      EXPECT_DOUBLE_EQ(arm.sampler.at("nu").get<double>(), 6.0);
    }
  }
  EXPECT_TRUE(has_alpha9_p100);

  const Preset deepgp = preset_deepgp("/tmp/agess_preset_unused", 1);
  BuiltTarget built = build_target(deepgp.arms.front().target);
  EXPECT_EQ(built.target.dim(), 53);
}

TEST(Presets, ReluIterationMultipliersFollowProtocol) {
  TempDir dir("agess_preset_relu");
  const Preset relu = preset_relu(dir.path.string(), 3);
  bool checked_arw = false;
  bool checked_slice = false;
  for (const auto& arm : relu.arms) {
    if (arm.label.rfind("arw_d10", 0) == 0) {
      EXPECT_EQ(arm.iterations, 300000);
      EXPECT_EQ(arm.burn_in, 25000);
      checked_arw = true;
    }
    if (arm.label.rfind("agess_t_d10", 0) == 0) {
      EXPECT_EQ(arm.iterations, 100000);
      EXPECT_EQ(arm.burn_in, 25000);
      checked_slice = true;
    }
  }
  EXPECT_TRUE(checked_arw);
  EXPECT_TRUE(checked_slice);
  // Datasets were materialized for every arm.
  for (const auto& arm : relu.arms) {
    const std::string base = arm.target.at("dataset");
    EXPECT_TRUE(fs::exists(base + ".csv"));
  }
}

TEST(Presets, VolcanoIncludesOptimalScaleArm) {
  const Preset volcano = preset_volcano("/tmp/agess_preset_unused", 1);
  bool found = false;
  for (const auto& arm : volcano.arms) {
    if (arm.label == "ess_optimal_p100") {
      EXPECT_NEAR(arm.sampler.at("sigma0").get<double>(), 1.1, 1e-12);
      found = true;
    }
  }
  EXPECT_TRUE(found);
  EXPECT_THROW(build_preset("unknown", "/tmp/x", 1), ConfigError);
}
