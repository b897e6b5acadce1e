#pragma once

#include "sclub/agents.hpp"
#include "sclub/envsim.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sclub {

inline constexpr std::string_view kVersion = "0.3.1";

struct WorldSpec {
  enum class Kind { synthetic, logged };
  Kind kind = Kind::synthetic;
  SyntheticParams synthetic;       // also carries the pool size for logged worlds
  std::filesystem::path archive;   // logged worlds only
};

struct RecordOptions {
  bool clusters = true;
  bool nmi = false;
  bool modularity = false;
};

struct SweepSpec {
  std::string policy;          // name of the policy whose n is varied
  std::vector<int> n_values;
};

struct ExperimentConfig {
  std::string name = "experiment";
  WorldSpec world;
  std::vector<PolicyConfig> policies;
  long horizon = 1000;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir = "out";
  RecordOptions record;
  SweepSpec sweep;
  int threads = 1;

  /// Throws std::invalid_argument on T < 1, no seeds, no policies or duplicate names.
  void validate() const;
};

/// Parses the JSON experiment document (see docs/config.md).
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON form; the manifest hashes this text.
std::string config_to_json(const ExperimentConfig& config);

struct RunResult {
  std::string policy;
  std::uint64_t seed = 0;
  std::vector<double> regret;      // r_t
  std::vector<double> cumulative;  // R_t
  std::vector<int> clusters;       // partition size after round t
  std::vector<double> nmi;         // vs ground truth, latest rebuild (empty unless recorded)
  std::vector<double> modularity;  // of the latest partition on its graph (empty unless recorded)
  std::vector<double> seconds_per_1000;

  long horizon() const { return static_cast<long>(regret.size()); }
};

/// Builds the environment a config describes for one seed.
std::unique_ptr<BanditEnvironment> make_environment(const WorldSpec& spec, std::uint64_t seed);

/// Core loop on a caller-supplied environment.
RunResult run_experiment(BanditEnvironment& env, const PolicyConfig& policy, long horizon, std::uint64_t seed,
                         const RecordOptions& record);

/// Fresh environment from the config's world spec, seeded by `seed`.
RunResult run_experiment(const ExperimentConfig& config, const PolicyConfig& policy, std::uint64_t seed);

/// Every (policy, seed) pair of the config, fanned out over `threads` workers.
/// Results are ordered by policy, then seed.
std::vector<RunResult> run_all(const ExperimentConfig& config, int threads);

struct Curve {
  std::vector<double> mean;
  std::vector<double> std;  // sample standard deviation, 0 for a single run
};

struct Aggregate {
  std::string policy;
  std::size_t runs = 0;
  Curve cumulative;
  Curve clusters;
  Curve nmi;
  Curve modularity;
};

/// Pointwise mean and sample standard deviation across seeds.
Aggregate aggregate_runs(const std::vector<RunResult>& results);
/// One aggregate per policy name, in order of first appearance.
std::vector<Aggregate> aggregate_by_policy(const std::vector<RunResult>& results);

struct SweepRow {
  int n = 0;
  double final_regret = 0.0;
  double final_regret_std = 0.0;
  double final_nmi = 0.0;
  double final_modularity = 0.0;
  double final_clusters = 0.0;
};

/// One aggregated run of the sweep policy per n value (synthetic worlds only).
std::vector<SweepRow> sparsity_sweep(const ExperimentConfig& config, const std::vector<int>& n_values, int threads);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Runs tasks 0..count-1 on up to `threads` workers; rethrows the first failure.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

// Reporting.

/// One row per round: t,policy,seed,regret,cumulative_regret,cluster_count[,nmi][,modularity].
void emit_csv(const std::vector<RunResult>& results, const std::filesystem::path& path, const RecordOptions& record);
std::vector<RunResult> read_csv(const std::filesystem::path& path);
void emit_sweep_csv(const std::vector<SweepRow>& rows, const std::filesystem::path& path);

/// Mean cumulative regret with +-1 std bands at `path`, cluster counts at the companion path.
void emit_plot(const std::vector<Aggregate>& aggregates, const std::filesystem::path& path);
std::filesystem::path companion_cluster_plot(const std::filesystem::path& path);

void write_manifest(const ExperimentConfig& config, const std::vector<RunResult>& results,
                    const std::filesystem::path& path);

}  // namespace sclub
