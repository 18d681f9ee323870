#include "rpk/experiments.hpp"

#include "rpk/errors.hpp"
#include "rpk/kpca.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace rpk {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::RandomForest: return "rf";
    case KernelKind::FastCluster: return "fastcluster";
    case KernelKind::Categorical: return "categorical";
    case KernelKind::Rbf: return "rbf";
    case KernelKind::Linear: return "linear";
  }
  return "?";
}

KernelKind kernel_kind_from_string(const std::string& name) {
  for (auto k : {KernelKind::RandomForest, KernelKind::FastCluster, KernelKind::Categorical,
                 KernelKind::Rbf, KernelKind::Linear})
    if (to_string(k) == name) return k;
  throw ParameterError("unknown kernel '" + name + "' (rf, fastcluster, categorical, rbf, linear)");
}

bool is_partition_kernel(KernelKind kind) {
  return kind == KernelKind::RandomForest || kind == KernelKind::FastCluster ||
         kind == KernelKind::Categorical;
}

SamplerKind sampler_kind(KernelKind kind) {
  switch (kind) {
    case KernelKind::RandomForest: return SamplerKind::RandomForest;
    case KernelKind::FastCluster: return SamplerKind::FastCluster;
    case KernelKind::Categorical: return SamplerKind::Categorical;
    default: throw ParameterError("kernel '" + to_string(kind) + "' is not a partition kernel");
  }
}

SamplerSpec RunConfig::sampler_spec(std::uint64_t seed_override) const {
  SamplerSpec s;
  s.kind = sampler_kind(kernel);
  s.tree = tree;
  s.fast_cluster = fast_cluster;
  s.seed = seed_override;
  return s;
}

GpOptions RunConfig::gp_options() const {
  GpOptions o;
  o.noise = noise;
  o.tol = tol;
  o.max_iter = max_iter;
  o.use_preconditioner = use_preconditioner;
  o.standardize_targets = true;
  return o;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["dataset"] = dataset;
  if (!target.empty()) j["target"] = target;
  j["kernel"] = to_string(kernel);
  j["m"] = m;
  j["seed"] = seed;
  j["noise"] = noise;
  j["tol"] = tol;
  j["max_iter"] = max_iter;
  j["use_preconditioner"] = use_preconditioner;
  j["train_fraction"] = train_fraction;
  j["threads"] = threads;
  j["k"] = k;
  j["seeds"] = seeds;
  j["m_list"] = m_list;
  j["n_list"] = n_list;
  j["tree"] = {{"mtry", tree.mtry}, {"bootstrap", tree.bootstrap}, {"min_leaf", tree.min_leaf},
               {"max_depth", tree.max_depth}};
  j["fast_cluster"] = {{"h", fast_cluster.h}, {"dim_keep_prob", fast_cluster.dim_keep_prob}};
  j["out"] = out;
  return j;
}

GpRun run_gp(const Dataset& train, const Dataset& test, const RunConfig& config, std::uint64_t seed) {
  GpRun run;
  run.kernel = config.kernel;
  const Vector& y_train = train.target();
  const Vector& y_test = test.target();
  if (is_partition_kernel(config.kernel)) {
    auto t0 = Clock::now();
    const auto sampled = sample_ensemble(config.sampler_spec(seed), train.sampler_input(), config.m);
    const CrossKernel cross = sampled.extend(test.sampler_input());
    run.sample_seconds = seconds_since(t0);
    t0 = Clock::now();
    const auto model = gp_fit(sampled.ensemble, y_train, config.gp_options());
    run.fit_seconds = seconds_since(t0);
    run.fit_report = model.report();
    t0 = Clock::now();
    run.prediction = gp_predict(model, cross);
    run.predict_seconds = seconds_since(t0);
  } else {
    const auto kind = config.kernel == KernelKind::Rbf ? BaselineKind::Rbf : BaselineKind::Linear;
    auto t0 = Clock::now();
    const BaselineModel model(kind, train.x, y_train);
    run.fit_seconds = seconds_since(t0);
    run.baseline = model.choice();
    t0 = Clock::now();
    run.prediction = model.predict(test.x);
    run.predict_seconds = seconds_since(t0);
  }
  run.metrics = gp_evaluate(run.prediction, y_test);
  return run;
}

nlohmann::json to_json(const GpRun& run) {
  nlohmann::json j;
  j["kernel"] = to_string(run.kernel);
  j["mse"] = run.metrics.mse;
  j["mean_log_likelihood"] = run.metrics.mean_log_likelihood;
  j["variance_clamped"] = run.prediction.clamped;
  j["predict_solve_iterations"] = run.prediction.solve_iterations;
  j["predict_all_converged"] = run.prediction.all_converged;
  j["sample_seconds"] = run.sample_seconds;
  j["fit_seconds"] = run.fit_seconds;
  j["predict_seconds"] = run.predict_seconds;
  if (run.fit_report) j["fit_solve"] = to_json(*run.fit_report);
  if (run.baseline)
    j["baseline"] = {{"lengthscale", run.baseline->lengthscale},
                     {"amplitude", run.baseline->amplitude},
                     {"noise", run.baseline->noise},
                     {"train_lml", run.baseline->train_lml}};
  return j;
}

EntryVariance kernel_entry_variance(const SamplerSpec& spec, const SamplerInput& input, std::size_t m,
                                    std::size_t reps, std::size_t a, std::size_t b) {
  if (reps < 2) throw ParameterError("kernel_entry_variance: need at least 2 repetitions");
  const auto n = input.rows();
  if (a >= n || b >= n) throw DimensionError("kernel_entry_variance: row index out of range");
  std::vector<double> values(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    SamplerSpec s = spec;
    s.seed = spec.seed + r;
    const auto sampled = sample_ensemble(s, input, m);
    std::size_t together = 0;
    for (const auto& p : *sampled.ensemble) together += p.label(a) == p.label(b) ? 1 : 0;
    values[r] = static_cast<double>(together) / static_cast<double>(m);
  }
  EntryVariance out;
  out.reps = reps;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(reps);
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.variance = ss / static_cast<double>(reps - 1);
  return out;
}

std::vector<SweepRow> m_sweep(const Dataset& data, const RunConfig& config, std::size_t variance_reps) {
  if (config.m_list.empty()) throw ParameterError("m_sweep: empty m list");
  if (!std::is_sorted(config.m_list.begin(), config.m_list.end()))
    throw ParameterError("m_sweep: m list must be ascending");
  if (config.seeds < 1) throw ParameterError("m_sweep: need at least one seed");
  std::vector<SplitResult> splits;
  for (int s = 0; s < config.seeds; ++s)
    splits.push_back(split(data, {config.train_fraction, config.seed + static_cast<std::uint64_t>(s)}));

  // Pair for the entry-variance column: row 0 and its nearest neighbour.
  const auto& x0 = splits.front().train.x;
  std::size_t nn = 1;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < x0.rows(); ++i) {
    const double d = (x0.row(i) - x0.row(0)).squaredNorm();
    if (d < best) {
      best = d;
      nn = static_cast<std::size_t>(i);
    }
  }

  std::vector<SweepRow> rows;
  for (std::size_t m : config.m_list) {
    if (m < 1) throw ParameterError("m_sweep: m must be positive");
    RunConfig c = config;
    c.m = m;
    SweepRow row;
    row.m = m;
    row.seeds = config.seeds;
    std::vector<double> lls;
    for (int s = 0; s < config.seeds; ++s) {
      const auto run = run_gp(splits[static_cast<std::size_t>(s)].train, splits[static_cast<std::size_t>(s)].test, c,
                              config.seed + static_cast<std::uint64_t>(s));
      lls.push_back(run.metrics.mean_log_likelihood);
      row.mean_mse += run.metrics.mse / config.seeds;
    }
    row.mean_ll = std::accumulate(lls.begin(), lls.end(), 0.0) / static_cast<double>(lls.size());
    row.median_ll = median(lls);
    if (is_partition_kernel(config.kernel) && variance_reps >= 2) {
      const auto ev = kernel_entry_variance(c.sampler_spec(config.seed + 0x5157), splits.front().train.sampler_input(),
                                            m, variance_reps, 0, nn);
      row.entry_mean = ev.mean;
      row.entry_variance = ev.variance;
    }
    rows.push_back(row);
  }
  return rows;
}

std::vector<ScalingRow> kpca_scaling(const RunConfig& config, std::size_t features) {
  if (config.n_list.empty()) throw ParameterError("scaling: empty N list");
  std::vector<ScalingRow> rows;
  EigenOptions eig;
  eig.seed = config.seed;
  eig.tol = 1e-6;
  for (std::size_t n : config.n_list) {
    const Dataset d = synth_scaling(n, features, config.seed);
    RowMatrix x = d.x;
    compute_standardization(x).apply(x);
    ScalingRow row;
    row.n = n;
    const auto t0 = Clock::now();
    if (is_partition_kernel(config.kernel)) {
      RunConfig c = config;
      SamplerInput in{&x, &*d.y, nullptr};
      const auto sampled = sample_ensemble(c.sampler_spec(config.seed), in, config.m);
      const auto model = kpca_fit(sampled.ensemble, config.k, eig);
      row.iterations = model.solver().iterations;
    } else if (config.kernel == KernelKind::Rbf) {
      const Matrix k = rbf_baseline_gram(x, std::sqrt(static_cast<double>(features)), 1.0);
      (void)dense_kpca_coordinates(k, config.k);
    } else {
      const Matrix k = linear_baseline_gram(x);
      (void)dense_kpca_coordinates(k, config.k);
    }
    row.seconds = seconds_since(t0);
    rows.push_back(row);
  }
  return rows;
}

double log_log_slope(const std::vector<ScalingRow>& rows) {
  if (rows.size() < 2) throw ParameterError("slope needs at least two N values");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows) {
    if (!(r.seconds > 0.0) || r.n == 0) throw NumericalBreakdown("slope: non-positive time or size");
    const double lx = std::log(static_cast<double>(r.n));
    const double ly = std::log(r.seconds);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw ParameterError("slope: N values must not all be equal");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace rpk
