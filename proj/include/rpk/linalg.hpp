#pragma once

#include "rpk/errors.hpp"
#include "rpk/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace rpk {

// Matrix-free operator: only products with vectors are available.
struct LinearOperator {
  Eigen::Index dim = 0;
  std::function<Vector(const Vector&)> apply;
  // Optional SPD approximate inverse; empty when absent.
  std::function<Vector(const Vector&)> precondition;

  bool has_preconditioner() const { return static_cast<bool>(precondition); }
};

LinearOperator identity_operator(Eigen::Index n);
LinearOperator dense_operator(Matrix a);

struct SolveReport {
  int iterations = 0;
  double residual = 0.0;  // final ||b - A x|| / ||b|| (recursive residual)
  bool converged = false;
  bool preconditioned = false;
  std::vector<double> residual_history;  // relative residual per iteration, entry 0 = start
  // Quadratic objective 0.5 x'Ax - b'x per iteration. CG minimizes the
  // energy norm of the error, so this (unlike the residual) never increases.
  std::vector<double> objective_history;
};

nlohmann::json to_json(const SolveReport& report);

class SolverError : public Error {
 public:
  SolverError(const std::string& what, SolveReport report)
      : Error(ErrorKind::Solver, what), report_(std::move(report)) {}
  const SolveReport& report() const noexcept { return report_; }

 private:
  SolveReport report_;
};

struct CgOptions {
  double tol = 1e-8;
  int max_iter = 2000;
  bool use_preconditioner = true;  // ignored when the operator has none
  bool record_history = true;
};

struct CgResult {
  Vector x;
  SolveReport report;
};

// (Preconditioned) conjugate gradient for SPD systems. Stops when the
// unpreconditioned relative residual ||b - Ax|| / ||b|| <= tol. Throws
// NumericalBreakdown on non-finite iterates.
CgResult cg_solve(const LinearOperator& a, const Vector& b, const CgOptions& options = {},
                  const Vector* x0 = nullptr);

struct EigenOptions {
  double tol = 1e-8;  // per-pair residual ||Av - lv|| <= tol * lambda_max
  int max_iter = 5000;
  std::uint64_t seed = 0x5eed;
  int oversample = 4;         // extra block columns for subspace iteration
  int block_threshold = 0;    // k above this uses block iteration; k <= it uses deflation
  bool center_start = false;  // start from mean-zero vectors
};

struct EigenResult {
  Vector values;   // descending
  Matrix vectors;  // orthonormal columns
  std::vector<double> residuals;
  int iterations = 0;  // operator applications (block counts one per column)
  bool converged = false;
};

// Top-k eigenpairs of a symmetric PSD operator. Block power iteration with
// Rayleigh-Ritz and re-orthonormalization every step by default; sequential
// deflated power iteration for k <= block_threshold. The block path is much
// less sensitive to a small gap between the k-th and (k+1)-th eigenvalues. On non-convergence the
// current estimates are returned with converged = false.
EigenResult power_topk(const LinearOperator& a, int k, const EigenOptions& options = {});

struct ConditionEstimate {
  double value = 0.0;
  double lambda_max = 0.0;
  double lambda_min = 0.0;
  bool lower_bound = false;  // inverse iteration's inner solve did not converge
};

struct ConditionOptions {
  double eig_tol = 1e-6;
  int inverse_iterations = 60;
  double cg_tol = 1e-10;
  int cg_max_iter = 5000;
  std::uint64_t seed = 0xc0de;
};

// lambda_max by power iteration, lambda_min by inverse iteration with
// cg_solve inner solves.
ConditionEstimate estimate_condition(const LinearOperator& a, const ConditionOptions& options = {});

}  // namespace rpk
