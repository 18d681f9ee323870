#include "rpk/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace rpk {

LinearOperator identity_operator(Eigen::Index n) {
  return {n, [](const Vector& v) { return v; }, {}};
}

LinearOperator dense_operator(Matrix a) {
  const auto n = a.rows();
  auto shared = std::make_shared<const Matrix>(std::move(a));
  return {n, [shared](const Vector& v) -> Vector { return (*shared) * v; }, {}};
}

nlohmann::json to_json(const SolveReport& report) {
  return {{"iterations", report.iterations},
          {"residual", report.residual},
          {"converged", report.converged},
          {"preconditioned", report.preconditioned},
          {"residual_history", report.residual_history}};
}

namespace {

void check_dim(const LinearOperator& a, const Vector& v, const char* where) {
  if (v.size() != a.dim)
    throw DimensionError(std::string(where) + ": vector length " + std::to_string(v.size()) +
                         " != operator dimension " + std::to_string(a.dim));
}

}  // namespace

CgResult cg_solve(const LinearOperator& a, const Vector& b, const CgOptions& options,
                  const Vector* x0) {
  check_dim(a, b, "cg_solve");
  if (!(options.tol > 0.0)) throw ParameterError("cg_solve: tol must be positive");
  const bool precond = options.use_preconditioner && a.has_preconditioner();

  CgResult result;
  SolveReport& rep = result.report;
  rep.preconditioned = precond;

  const double b_norm = b.norm();
  if (!std::isfinite(b_norm)) throw NumericalBreakdown("cg_solve: right-hand side not finite");
  if (b_norm == 0.0) {
    result.x = Vector::Zero(b.size());
    rep.converged = true;
    if (options.record_history) {
      rep.residual_history.push_back(0.0);
      rep.objective_history.push_back(0.0);
    }
    return result;
  }

  Vector x;
  Vector r;
  if (x0) {
    check_dim(a, *x0, "cg_solve (x0)");
    x = *x0;
    r = b - a.apply(x);
  } else {
    x = Vector::Zero(b.size());
    r = b;
  }
  auto objective = [&] { return -0.5 * x.dot(b + r); };

  double rel = r.norm() / b_norm;
  if (options.record_history) {
    rep.residual_history.push_back(rel);
    rep.objective_history.push_back(objective());
  }
  if (rel <= options.tol) {
    rep.residual = rel;
    rep.converged = true;
    result.x = std::move(x);
    return result;
  }

  Vector z = precond ? a.precondition(r) : r;
  Vector p = z;
  double rz = r.dot(z);
  for (int it = 1; it <= options.max_iter; ++it) {
    const Vector ap = a.apply(p);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap) || pap <= 0.0) {
      rep.iterations = it;
      rep.residual = rel;
      throw NumericalBreakdown("cg_solve: breakdown at iteration " + std::to_string(it) +
                               " (p'Ap = " + std::to_string(pap) +
                               ", last relative residual = " + std::to_string(rel) + ")");
    }
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    rel = r.norm() / b_norm;
    rep.iterations = it;
    if (!std::isfinite(rel))
      throw NumericalBreakdown("cg_solve: non-finite residual at iteration " + std::to_string(it));
    if (options.record_history) {
      rep.residual_history.push_back(rel);
      rep.objective_history.push_back(objective());
    }
    if (rel <= options.tol) {
      rep.converged = true;
      break;
    }
    if (precond) z = a.precondition(r);
    const double rz_next = r.dot(precond ? z : r);
    const double beta = rz_next / rz;
    rz = rz_next;
    if (precond)
      p = z + beta * p;
    else
      p = r + beta * p;
  }
  rep.residual = rel;
  result.x = std::move(x);
  return result;
}

namespace {

Matrix random_block(Eigen::Index n, Eigen::Index cols, std::uint64_t seed, bool center) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Matrix q(n, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < n; ++i) q(i, j) = normal(rng);
  if (center) q.rowwise() -= q.colwise().mean();
  return q;
}

Matrix orthonormalize(const Matrix& z) {
  Eigen::HouseholderQR<Matrix> qr(z);
  return qr.householderQ() * Matrix::Identity(z.rows(), z.cols());
}

// Residual floor so exactly-zero operators (and zero eigenvalues) converge.
double accept_threshold(double tol, double lambda_max) {
  return std::max(tol * std::abs(lambda_max), 1e-14 * (1.0 + std::abs(lambda_max)));
}

EigenResult block_power(const LinearOperator& a, int k, const EigenOptions& opt) {
  const Eigen::Index n = a.dim;
  const Eigen::Index b = std::min<Eigen::Index>(n, k + std::max(opt.oversample, 0));
  Matrix q = orthonormalize(random_block(n, b, opt.seed, opt.center_start));
  EigenResult res;
  Matrix aq(n, b);
  for (int it = 1; it <= opt.max_iter; ++it) {
    for (Eigen::Index j = 0; j < b; ++j) aq.col(j) = a.apply(q.col(j));
    res.iterations += static_cast<int>(b);
    Matrix h = q.transpose() * aq;
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h);
    // Eigen returns ascending order.
    Matrix s = eig.eigenvectors().rowwise().reverse();
    Vector lambda = eig.eigenvalues().reverse();
    Matrix v = q * s;
    Matrix av = aq * s;
    const double thresh = accept_threshold(opt.tol, lambda[0]);
    res.residuals.assign(static_cast<std::size_t>(k), 0.0);
    bool done = true;
    for (int i = 0; i < k; ++i) {
      const double r = (av.col(i) - lambda[i] * v.col(i)).norm();
      res.residuals[static_cast<std::size_t>(i)] = r;
      if (!(r <= thresh)) done = false;
    }
    res.values = lambda.head(k);
    res.vectors = orthonormalize(v.leftCols(k));
    // Keep column signs of the Ritz vectors after re-orthonormalization.
    for (int i = 0; i < k; ++i)
      if (res.vectors.col(i).dot(v.col(i)) < 0) res.vectors.col(i) *= -1.0;
    if (done) {
      res.converged = true;
      return res;
    }
    if (!av.allFinite()) throw NumericalBreakdown("power_topk: non-finite iterate");
    q = orthonormalize(av);
  }
  return res;
}

EigenResult deflated_power(const LinearOperator& a, int k, const EigenOptions& opt) {
  const Eigen::Index n = a.dim;
  EigenResult res;
  res.values = Vector::Zero(k);
  res.vectors = Matrix::Zero(n, k);
  res.residuals.assign(static_cast<std::size_t>(k), 0.0);
  res.converged = true;
  double lambda_max = 0.0;
  for (int i = 0; i < k; ++i) {
    Vector v = random_block(n, 1, opt.seed + static_cast<std::uint64_t>(i), opt.center_start).col(0);
    auto deflate = [&](Vector& w) {
      for (int j = 0; j < i; ++j) w -= res.vectors.col(j).dot(w) * res.vectors.col(j);
    };
    deflate(v);
    v.normalize();
    bool converged = false;
    double lambda = 0.0;
    double r = 0.0;
    for (int it = 1; it <= opt.max_iter; ++it) {
      Vector av = a.apply(v);
      ++res.iterations;
      lambda = v.dot(av);
      r = (av - lambda * v).norm();
      if (i == 0) lambda_max = lambda;
      if (r <= accept_threshold(opt.tol, lambda_max)) {
        converged = true;
        break;
      }
      deflate(av);
      const double norm = av.norm();
      if (!std::isfinite(norm)) throw NumericalBreakdown("power_topk: non-finite iterate");
      if (norm == 0.0) {
        // v lies in the null space of the deflated operator.
        converged = true;
        lambda = 0.0;
        r = 0.0;
        break;
      }
      v = av / norm;
    }
    // Re-orthogonalize against earlier vectors before storing.
    deflate(v);
    v.normalize();
    res.values[i] = lambda;
    res.vectors.col(i) = v;
    res.residuals[static_cast<std::size_t>(i)] = r;
    res.converged = res.converged && converged;
  }
  // A later vector can overtake an earlier one when eigenvalues are tied or
  // the earlier pair stopped early; keep the output sorted.
  std::vector<int> order(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return res.values[x] > res.values[y]; });
  EigenResult sorted = res;
  for (int i = 0; i < k; ++i) {
    const int src = order[static_cast<std::size_t>(i)];
    sorted.values[i] = res.values[src];
    sorted.vectors.col(i) = res.vectors.col(src);
    sorted.residuals[static_cast<std::size_t>(i)] = res.residuals[static_cast<std::size_t>(src)];
  }
  return sorted;
}

}  // namespace

EigenResult power_topk(const LinearOperator& a, int k, const EigenOptions& options) {
  if (k < 1 || k > a.dim)
    throw ParameterError("power_topk: k = " + std::to_string(k) + " outside [1, " +
                         std::to_string(a.dim) + "]");
  if (k > options.block_threshold) return block_power(a, k, options);
  return deflated_power(a, k, options);
}

ConditionEstimate estimate_condition(const LinearOperator& a, const ConditionOptions& options) {
  ConditionEstimate est;
  EigenOptions eopt;
  eopt.tol = options.eig_tol;
  eopt.seed = options.seed;
  est.lambda_max = power_topk(a, 1, eopt).values[0];

  CgOptions cg;
  cg.tol = options.cg_tol;
  cg.max_iter = options.cg_max_iter;
  cg.record_history = false;
  Vector x = random_block(a.dim, 1, options.seed + 1, false).col(0);
  x.normalize();
  double lambda_min = x.dot(a.apply(x));
  for (int it = 0; it < options.inverse_iterations; ++it) {
    CgResult solve;
    try {
      solve = cg_solve(a, x, cg);
    } catch (const NumericalBreakdown&) {
      est.lower_bound = true;
      break;
    }
    if (!solve.report.converged) est.lower_bound = true;
    const double norm = solve.x.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      est.lower_bound = true;
      break;
    }
    x = solve.x / norm;
    const double next = x.dot(a.apply(x));
    const bool settled = std::abs(next - lambda_min) <= 1e-9 * std::abs(next);
    lambda_min = next;
    if (settled) break;
  }
  est.lambda_min = lambda_min;
  est.value = est.lambda_max / lambda_min;
  return est;
}

}  // namespace rpk
