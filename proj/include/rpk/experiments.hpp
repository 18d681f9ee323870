#pragma once

#include "rpk/baselines.hpp"
#include "rpk/dataset.hpp"
#include "rpk/gp.hpp"
#include "rpk/sampler.hpp"

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace rpk {

enum class KernelKind { RandomForest, FastCluster, Categorical, Rbf, Linear };
std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& name);
bool is_partition_kernel(KernelKind kind);
SamplerKind sampler_kind(KernelKind kind);  // ParameterError for baselines

// Everything needed to rerun a command; written into every output artifact.
struct RunConfig {
  std::string command;
  std::string dataset;
  std::string target;  // only for CSV paths
  KernelKind kernel = KernelKind::RandomForest;
  std::size_t m = 200;
  std::uint64_t seed = 0;
  double noise = 1e-2;
  double tol = 1e-8;
  int max_iter = 5000;
  bool use_preconditioner = true;
  double train_fraction = 0.5;
  int threads = 0;
  int k = 2;
  int seeds = 5;
  std::vector<std::size_t> m_list;
  std::vector<std::size_t> n_list;
  TreeConfig tree;
  FastClusterConfig fast_cluster;
  std::string out;

  SamplerSpec sampler_spec(std::uint64_t seed_override) const;
  GpOptions gp_options() const;
  nlohmann::json to_json() const;
};

struct GpRun {
  KernelKind kernel = KernelKind::RandomForest;
  EvalMetrics metrics;
  Prediction prediction;
  std::optional<SolveReport> fit_report;  // partition kernels only
  std::optional<BaselineChoice> baseline;  // baselines only
  double sample_seconds = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
};

// Fits on train, predicts test and scores with gp_evaluate. Partition kernels
// and baselines differ only in how the Prediction is produced.
GpRun run_gp(const Dataset& train, const Dataset& test, const RunConfig& config, std::uint64_t seed);

nlohmann::json to_json(const GpRun& run);

// Empirical variance of the m-approximate kernel entry for rows (a, b) over
// `reps` independent ensembles; the ensembles use seeds seed, seed+1, ...
struct EntryVariance {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance
  std::size_t reps = 0;
};
EntryVariance kernel_entry_variance(const SamplerSpec& spec, const SamplerInput& input, std::size_t m,
                                    std::size_t reps, std::size_t a, std::size_t b);

struct SweepRow {
  std::size_t m = 0;
  double mean_ll = 0.0;
  double median_ll = 0.0;
  double mean_mse = 0.0;
  double entry_mean = 0.0;
  double entry_variance = 0.0;
  int seeds = 0;
};
// One split and fit per (m, seed); the entry variance uses the training pair
// (0, nearest neighbour of row 0) of the first split.
std::vector<SweepRow> m_sweep(const Dataset& data, const RunConfig& config, std::size_t variance_reps = 50);

struct ScalingRow {
  std::size_t n = 0;
  double seconds = 0.0;  // sampling + eigensolve for partition kernels, Gram + eigensolve for RBF
  int iterations = 0;
};
std::vector<ScalingRow> kpca_scaling(const RunConfig& config, std::size_t features = 5);

// Least-squares slope of log(seconds) against log(N).
double log_log_slope(const std::vector<ScalingRow>& rows);

}  // namespace rpk
