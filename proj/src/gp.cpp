#include "rpk/gp.hpp"

#include "rpk/threading.hpp"

#include <atomic>
#include <cmath>
#include <numbers>

namespace rpk {

namespace {
constexpr double kMinVariance = 1e-12;
}

GPRegressor gp_fit(std::shared_ptr<const PartitionEnsemble> ensemble, const Vector& y,
                   const GpOptions& options) {
  if (!ensemble) throw ParameterError("gp_fit: null ensemble");
  if (static_cast<std::size_t>(y.size()) != ensemble->n())
    throw DimensionError("gp_fit: target length " + std::to_string(y.size()) +
                         " != ensemble size " + std::to_string(ensemble->n()));
  if (!(options.noise > 0.0)) throw ParameterError("gp_fit: noise variance must be positive");
  if (!y.allFinite()) throw DataError("gp_fit: non-finite targets");

  GPRegressor model(GramOperator(std::move(ensemble), options.noise, options.precond_sigma),
                    options);
  Vector target = y;
  if (options.standardize_targets) {
    model.y_mean_ = y.mean();
    const double var = (y.array() - model.y_mean_).square().mean();
    model.y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    target = (y.array() - model.y_mean_) / model.y_scale_;
  }

  CgOptions cg;
  cg.tol = options.tol;
  cg.max_iter = options.max_iter;
  cg.use_preconditioner = options.use_preconditioner;
  auto solve = cg_solve(model.gram_.as_operator(options.use_preconditioner), target, cg);
  if (!solve.report.converged)
    throw SolverError("gp_fit: PCG did not converge in " + std::to_string(solve.report.iterations) +
                          " iterations (relative residual " +
                          std::to_string(solve.report.residual) + ")",
                      solve.report);
  model.alpha_ = std::move(solve.x);
  model.report_ = std::move(solve.report);
  return model;
}

Prediction gp_predict(const GPRegressor& model, const CrossKernel& cross) {
  if (cross.n_train() != model.gram().n() || cross.m() != model.gram().m())
    throw DimensionError("gp_predict: cross kernel does not match the fitted ensemble");
  const auto n_test = cross.n_test();
  Prediction pred;
  Vector mean = cross.apply(model.alpha());
  Vector var(static_cast<Eigen::Index>(n_test));

  const auto op = model.gram().as_operator(model.options().use_preconditioner);
  CgOptions cg;
  cg.tol = model.options().tol;
  cg.max_iter = model.options().max_iter;
  cg.record_history = false;
  std::atomic<long> iterations{0};
  std::atomic<bool> converged{true};
  std::atomic<std::size_t> clamped{0};
  parallel_for(n_test, [&](std::size_t t) {
    const Vector k = cross.row(t);
    double quad = 0.0;
    if (k.squaredNorm() > 0.0) {
      const auto solve = cg_solve(op, k, cg);
      iterations += solve.report.iterations;
      if (!solve.report.converged) converged = false;
      quad = k.dot(solve.x);
    }
    double v = 1.0 + model.noise() - quad;
    if (!(v > kMinVariance)) {
      v = kMinVariance;
      ++clamped;
    }
    var[static_cast<Eigen::Index>(t)] = v;
  });

  const double s = model.target_scale();
  pred.mean = (mean.array() * s + model.target_mean()).matrix();
  pred.variance = var * (s * s);
  pred.solve_iterations = iterations.load();
  pred.all_converged = converged.load();
  pred.clamped = clamped.load();
  return pred;
}

double gaussian_log_density(double y, double mean, double variance) {
  const double r = y - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

EvalMetrics gp_evaluate(const Prediction& prediction, const Vector& y_test) {
  if (prediction.mean.size() != y_test.size() || prediction.variance.size() != y_test.size())
    throw DimensionError("gp_evaluate: prediction and target lengths differ");
  EvalMetrics m;
  m.mean = prediction.mean;
  m.variance = prediction.variance;
  const auto n = y_test.size();
  if (n == 0) return m;
  double sq = 0.0;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = y_test[i] - prediction.mean[i];
    sq += r * r;
    ll += gaussian_log_density(y_test[i], prediction.mean[i], prediction.variance[i]);
  }
  m.mse = sq / static_cast<double>(n);
  m.mean_log_likelihood = ll / static_cast<double>(n);
  return m;
}

}  // namespace rpk
