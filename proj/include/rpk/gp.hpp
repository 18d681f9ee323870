#pragma once

#include "rpk/gram.hpp"
#include "rpk/linalg.hpp"

#include <memory>
#include <optional>

namespace rpk {

struct GpOptions {
  double noise = 1e-2;  // sigma_n^2, on the standardized scale when standardizing
  std::optional<double> precond_sigma;  // defaults to noise
  double tol = 1e-8;
  int max_iter = 5000;
  bool use_preconditioner = true;
  bool standardize_targets = false;
};

// Per-point Gaussian predictive distribution (observation noise included).
struct Prediction {
  Vector mean;
  Vector variance;
  std::size_t clamped = 0;  // variances that came out <= 0 and were clamped
  long solve_iterations = 0;
  bool all_converged = true;
};

struct EvalMetrics {
  double mse = 0.0;
  double mean_log_likelihood = 0.0;
  Vector mean;
  Vector variance;
};

// GP regression with an m-approximate partition kernel. Immutable after fit.
class GPRegressor {
 public:
  const GramOperator& gram() const noexcept { return gram_; }
  const Vector& alpha() const noexcept { return alpha_; }
  double noise() const noexcept { return gram_.jitter(); }
  double target_mean() const noexcept { return y_mean_; }
  double target_scale() const noexcept { return y_scale_; }
  const SolveReport& report() const noexcept { return report_; }
  const GpOptions& options() const noexcept { return options_; }

 private:
  friend GPRegressor gp_fit(std::shared_ptr<const PartitionEnsemble>, const Vector&,
                            const GpOptions&);
  GPRegressor(GramOperator gram, GpOptions options) : gram_(std::move(gram)), options_(options) {}

  GramOperator gram_;
  GpOptions options_;
  Vector alpha_;  // (K + sigma_n^2 I)^{-1} y on the fitting scale
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  SolveReport report_;
};

// Solves (K + noise I) alpha = y with PCG. Throws SolverError (carrying the
// report) if the solve does not reach tol.
GPRegressor gp_fit(std::shared_ptr<const PartitionEnsemble> ensemble, const Vector& y,
                   const GpOptions& options = {});

// mean_t = k_t' alpha; var_t = 1 + noise - k_t'(K + noise I)^{-1} k_t, one
// PCG solve per test point. Results are on the original target scale.
Prediction gp_predict(const GPRegressor& model, const CrossKernel& cross);

// Shared by every kernel so comparisons differ only in their predictions.
EvalMetrics gp_evaluate(const Prediction& prediction, const Vector& y_test);

double gaussian_log_density(double y, double mean, double variance);

}  // namespace rpk
