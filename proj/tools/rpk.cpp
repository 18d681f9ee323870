// rpk: sampling, GP regression, m-sweep, KPCA scaling and KPCA coordinates
// with random partition kernels. Tables are CSV; each table gets a JSON
// sidecar (<out>.json) holding the run configuration.

#include "rpk/dataset.hpp"
#include "rpk/errors.hpp"
#include "rpk/experiments.hpp"
#include "rpk/kpca.hpp"
#include "rpk/linalg.hpp"
#include "rpk/partition.hpp"
#include "rpk/threading.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace {

using nlohmann::json;

struct Output {
  std::string path;
  std::ostringstream table;

  // Writes the table and its sidecar, or prints both to stdout.
  void finish(const json& sidecar) const {
    if (path.empty()) {
      std::cout << table.str();
      std::cerr << sidecar.dump(2) << "\n";
      return;
    }
    std::ofstream out(path);
    if (!out) throw rpk::ResourceError("cannot write '" + path + "'");
    out << table.str();
    std::ofstream side(path + ".json");
    side << sidecar.dump(2) << "\n";
    if (!out || !side) throw rpk::ResourceError("failed writing '" + path + "'");
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

rpk::Dataset load(const rpk::RunConfig& cfg, json& sidecar) {
  auto loaded = rpk::load_dataset(cfg.dataset, cfg.target);
  sidecar["ingest"] = {{"rows_read", loaded.report.rows_read},
                       {"rows_kept", loaded.report.rows_kept},
                       {"rows_dropped_missing", loaded.report.rows_dropped}};
  return std::move(loaded.dataset);
}

json base_sidecar(const rpk::RunConfig& cfg) { return json{{"config", cfg.to_json()}, {"version", rpk::kVersion}}; }

void cmd_sample(rpk::RunConfig cfg) {
  auto sidecar = base_sidecar(cfg);
  rpk::Dataset d = load(cfg, sidecar);
  rpk::compute_standardization(d.x).apply(d.x);
  const auto sampled = rpk::sample_ensemble(cfg.sampler_spec(cfg.seed), d.sampler_input(), cfg.m);
  json prov = sidecar;
  prov["sampler"] = sampled.spec.to_json();
  prov["m"] = sampled.ensemble->m();
  prov["n"] = sampled.ensemble->n();
  const std::string path = cfg.out.empty() ? "ensemble.rpke" : cfg.out;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rpk::ResourceError("cannot write '" + path + "'");
  rpk::write_ensemble(out, *sampled.ensemble, prov.dump());
  std::ofstream(path + ".json") << prov.dump(2) << "\n";
  std::cout << "wrote " << path << " (m=" << sampled.ensemble->m() << ", N=" << sampled.ensemble->n() << ")\n";
}

void cmd_gp(rpk::RunConfig cfg) {
  auto sidecar = base_sidecar(cfg);
  const rpk::Dataset d = load(cfg, sidecar);
  const auto parts = rpk::split(d, {cfg.train_fraction, cfg.seed});
  Output out{cfg.out, {}};
  try {
    const auto run = rpk::run_gp(parts.train, parts.test, cfg, cfg.seed);
    const int iterations = run.fit_report ? run.fit_report->iterations : 0;
    out.table << "dataset,kernel,m,seed,n_train,n_test,mse,mean_log_likelihood,iterations,wall_seconds\n"
              << d.name << ',' << rpk::to_string(cfg.kernel) << ',' << cfg.m << ',' << cfg.seed << ','
              << parts.train.rows() << ',' << parts.test.rows() << ',' << fmt(run.metrics.mse) << ','
              << fmt(run.metrics.mean_log_likelihood) << ',' << iterations << ','
              << fmt(run.sample_seconds + run.fit_seconds + run.predict_seconds) << "\n";
    sidecar["result"] = rpk::to_json(run);
  } catch (const rpk::SolverError& e) {
    sidecar["error"] = e.what();
    sidecar["solve"] = rpk::to_json(e.report());
    out.path = cfg.out;
    out.finish(sidecar);
    throw;
  }
  out.finish(sidecar);
}

void cmd_msweep(rpk::RunConfig cfg) {
  if (cfg.m_list.empty()) cfg.m_list = {1, 2, 5, 10, 20, 50, 100, 200};
  auto sidecar = base_sidecar(cfg);
  const rpk::Dataset d = load(cfg, sidecar);
  const auto rows = rpk::m_sweep(d, cfg);
  Output out{cfg.out, {}};
  out.table << "m,seeds,mean_log_likelihood,median_log_likelihood,mean_mse,entry_mean,entry_variance,variance_bound\n";
  for (const auto& r : rows)
    out.table << r.m << ',' << r.seeds << ',' << fmt(r.mean_ll) << ',' << fmt(r.median_ll) << ','
              << fmt(r.mean_mse) << ',' << fmt(r.entry_mean) << ',' << fmt(r.entry_variance) << ','
              << fmt(0.25 / static_cast<double>(r.m)) << "\n";
  out.finish(sidecar);
}

void cmd_scaling(rpk::RunConfig cfg) {
  if (cfg.n_list.empty()) cfg.n_list = {2000, 8000, 32000, 128000};
  auto sidecar = base_sidecar(cfg);
  const auto rows = rpk::kpca_scaling(cfg);
  Output out{cfg.out, {}};
  out.table << "n,seconds,eigen_iterations\n";
  for (const auto& r : rows) out.table << r.n << ',' << fmt(r.seconds) << ',' << r.iterations << "\n";
  if (rows.size() >= 2) sidecar["log_log_slope"] = rpk::log_log_slope(rows);
  out.finish(sidecar);
}

void cmd_kpca(rpk::RunConfig cfg, bool with_test) {
  auto sidecar = base_sidecar(cfg);
  const rpk::Dataset d = load(cfg, sidecar);
  rpk::Dataset train;
  rpk::Dataset test;
  bool have_test = false;
  if (with_test) {
    auto parts = rpk::split(d, {cfg.train_fraction, cfg.seed});
    train = std::move(parts.train);
    test = std::move(parts.test);
    have_test = true;
  } else {
    train = d;
    train.standardization = rpk::compute_standardization(train.x);
    train.standardization.apply(train.x);
  }
  rpk::Matrix train_coords;
  rpk::Matrix test_coords;
  rpk::Vector eigenvalues;
  if (rpk::is_partition_kernel(cfg.kernel)) {
    const auto sampled = rpk::sample_ensemble(cfg.sampler_spec(cfg.seed), train.sampler_input(), cfg.m);
    rpk::EigenOptions eig;
    eig.seed = cfg.seed;
    const auto model = rpk::kpca_fit(sampled.ensemble, cfg.k, eig);
    train_coords = model.training_coordinates();
    eigenvalues = model.eigenvalues();
    if (have_test) test_coords = rpk::kpca_project(model, sampled.extend(test.sampler_input()));
    sidecar["eigen_iterations"] = model.solver().iterations;
  } else {
    if (have_test) throw rpk::ParameterError("kpca: test projection is only implemented for partition kernels");
    const rpk::Matrix k = cfg.kernel == rpk::KernelKind::Rbf
                              ? rpk::rbf_baseline_gram(train.x, std::sqrt(static_cast<double>(train.cols())), 1.0)
                              : rpk::linear_baseline_gram(train.x);
    train_coords = rpk::dense_kpca_coordinates(k, cfg.k, &eigenvalues);
  }
  sidecar["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  Output out{cfg.out, {}};
  out.table << "split,row";
  for (int c = 0; c < cfg.k; ++c) out.table << ",pc" << c + 1;
  out.table << "\n";
  auto emit = [&](const char* name, const rpk::Matrix& coords) {
    for (Eigen::Index i = 0; i < coords.rows(); ++i) {
      out.table << name << ',' << i;
      for (Eigen::Index c = 0; c < coords.cols(); ++c) out.table << ',' << fmt(coords(i, c));
      out.table << "\n";
    }
  };
  emit("train", train_coords);
  if (have_test) emit("test", test_coords);
  out.finish(sidecar);
}

void add_common(CLI::App* sub, rpk::RunConfig& cfg, std::string& kernel) {
  sub->add_option("--dataset", cfg.dataset, "registered name (mpg, bodyfat, piecewise) or CSV path");
  sub->add_option("--target", cfg.target, "target column for CSV paths");
  sub->add_option("--kernel", kernel, "rf, fastcluster, categorical, rbf or linear")->capture_default_str();
  sub->add_option("--m", cfg.m, "number of partitions")->capture_default_str();
  sub->add_option("--seed", cfg.seed, "base seed")->capture_default_str();
  sub->add_option("--noise", cfg.noise, "observation noise variance (standardized targets)")->capture_default_str();
  sub->add_option("--tol", cfg.tol, "relative residual tolerance")->capture_default_str();
  sub->add_option("--max-iter", cfg.max_iter, "iteration cap per solve")->capture_default_str();
  sub->add_flag("--no-precond", [&cfg](std::int64_t) { cfg.use_preconditioner = false; }, "plain CG");
  sub->add_option("--train-fraction", cfg.train_fraction, "share of rows used for training")->capture_default_str();
  sub->add_option("--threads", cfg.threads, "worker cap (0 = hardware)")->capture_default_str();
  sub->add_option("--out", cfg.out, "output file; a .json sidecar is written beside it");
  sub->add_option("--min-leaf", cfg.tree.min_leaf, "random forest minimum leaf size")->capture_default_str();
  sub->add_option("--max-depth", cfg.tree.max_depth, "random forest depth cap (0 = ceil(log2 N))")->capture_default_str();
  sub->add_option("--fc-h", cfg.fast_cluster.h, "fast cluster center exponent cap (-1 = ceil(log2 N))")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random partition kernels: sampling, GP regression and kernel PCA"};
  app.set_version_flag("--version", std::string(rpk::kVersion));
  app.require_subcommand(1);

  rpk::RunConfig cfg;
  std::string kernel = "rf";
  bool with_test = false;

  auto* sample = app.add_subcommand("sample", "sample a partition ensemble and write it to a file");
  auto* gp = app.add_subcommand("gp", "fit and evaluate a GP on a seeded train/test split");
  auto* msweep = app.add_subcommand("msweep", "test log-likelihood and MSE as a function of m");
  auto* scaling = app.add_subcommand("scaling", "KPCA wall time against N on synthetic data");
  auto* kpca = app.add_subcommand("kpca", "top-k kernel PCA coordinates");
  for (auto* sub : {sample, gp, msweep, scaling, kpca}) add_common(sub, cfg, kernel);
  for (auto* sub : {sample, gp, msweep, kpca}) sub->get_option("--dataset")->required();
  msweep->add_option("--m-list", cfg.m_list, "ascending list of m values")->delimiter(',');
  msweep->add_option("--seeds", cfg.seeds, "splits per m")->capture_default_str();
  scaling->add_option("--n-list", cfg.n_list, "dataset sizes")->delimiter(',');
  scaling->add_option("--k", cfg.k, "components")->capture_default_str();
  kpca->add_option("--k", cfg.k, "components")->capture_default_str();
  kpca->add_flag("--with-test", with_test, "split the data and also project the test rows");

  // Scaling runs default to 100 partitions; other commands to 200.
  scaling->preparse_callback([&](std::size_t) { cfg.m = 100; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : rpk::exit_code(rpk::ErrorKind::Parameter);
  }

  try {
    cfg.kernel = rpk::kernel_kind_from_string(kernel);
    if (cfg.threads < 0) throw rpk::ParameterError("--threads must be non-negative");
    if (cfg.threads > 0) rpk::set_thread_limit(static_cast<std::size_t>(cfg.threads));
    if (cfg.m < 1) throw rpk::ParameterError("--m must be at least 1");
    if (*sample) {
      cfg.command = "sample";
      cmd_sample(cfg);
    } else if (*gp) {
      cfg.command = "gp";
      cmd_gp(cfg);
    } else if (*msweep) {
      cfg.command = "msweep";
      cmd_msweep(cfg);
    } else if (*scaling) {
      cfg.command = "scaling";
      cmd_scaling(cfg);
    } else if (*kpca) {
      cfg.command = "kpca";
      cmd_kpca(cfg, with_test);
    }
  } catch (const rpk::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return rpk::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
