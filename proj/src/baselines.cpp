#include "rpk/baselines.hpp"

#include "rpk/errors.hpp"

#include <cmath>
#include <numbers>

namespace rpk {

namespace {

void check_cap(Eigen::Index rows, Eigen::Index cols, std::size_t cap) {
  if (static_cast<std::size_t>(rows) > cap || static_cast<std::size_t>(cols) > cap)
    throw ResourceError("dense baseline Gram " + std::to_string(rows) + "x" +
                        std::to_string(cols) + " exceeds cap " + std::to_string(cap));
}

}  // namespace

Matrix rbf_cross_gram(const RowMatrix& a, const RowMatrix& b, double lengthscale,
                      double amplitude, std::size_t cap) {
  if (a.cols() != b.cols()) throw DimensionError("rbf gram: feature counts differ");
  if (!(lengthscale > 0.0)) throw ParameterError("rbf gram: lengthscale must be positive");
  check_cap(a.rows(), b.rows(), cap);
  Matrix k(a.rows(), b.rows());
  const double inv = 1.0 / (2.0 * lengthscale * lengthscale);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < b.rows(); ++j)
      k(i, j) = amplitude * std::exp(-(a.row(i) - b.row(j)).squaredNorm() * inv);
  return k;
}

Matrix rbf_baseline_gram(const RowMatrix& x, double lengthscale, double amplitude,
                         std::size_t cap) {
  return rbf_cross_gram(x, x, lengthscale, amplitude, cap);
}

Matrix linear_cross_gram(const RowMatrix& a, const RowMatrix& b, std::size_t cap) {
  if (a.cols() != b.cols()) throw DimensionError("linear gram: feature counts differ");
  check_cap(a.rows(), b.rows(), cap);
  return a * b.transpose();
}

Matrix linear_baseline_gram(const RowMatrix& x, std::size_t cap) {
  return linear_cross_gram(x, x, cap);
}

DenseGP::DenseGP(const Matrix& k, const Vector& y, double noise, bool standardize_targets)
    : noise_(noise) {
  if (k.rows() != k.cols() || k.rows() != y.size())
    throw DimensionError("dense GP: Gram and target sizes differ");
  if (!(noise > 0.0)) throw ParameterError("dense GP: noise must be positive");
  Vector target = y;
  if (standardize_targets && y.size() > 0) {
    y_mean_ = y.mean();
    const double var = (y.array() - y_mean_).square().mean();
    y_scale_ = var > 0.0 ? std::sqrt(var) : 1.0;
    target = (y.array() - y_mean_) / y_scale_;
  }
  Matrix a = k;
  a.diagonal().array() += noise;
  llt_.compute(a);
  if (llt_.info() != Eigen::Success)
    throw NumericalBreakdown("dense GP: Cholesky factorization failed");
  alpha_ = llt_.solve(target);
  const double log_det = 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
  lml_ = -0.5 * target.dot(alpha_) - 0.5 * log_det -
         0.5 * static_cast<double>(y.size()) * std::log(2.0 * std::numbers::pi);
}

Prediction DenseGP::predict(const Matrix& k_cross, const Vector& k_diag) const {
  if (k_cross.cols() != alpha_.size() || k_cross.rows() != k_diag.size())
    throw DimensionError("dense GP predict: size mismatch");
  Prediction p;
  const Vector mean = k_cross * alpha_;
  const Matrix v = llt_.matrixL().solve(k_cross.transpose());
  Vector var = k_diag.array() + noise_ - v.colwise().squaredNorm().transpose().array();
  for (Eigen::Index i = 0; i < var.size(); ++i)
    if (!(var[i] > 1e-12)) {
      var[i] = 1e-12;
      ++p.clamped;
    }
  p.mean = (mean.array() * y_scale_ + y_mean_).matrix();
  p.variance = var * (y_scale_ * y_scale_);
  return p;
}

std::string to_string(BaselineKind kind) { return kind == BaselineKind::Rbf ? "rbf" : "linear"; }

BaselineModel::BaselineModel(BaselineKind kind, const RowMatrix& x, const Vector& y,
                             const BaselineGrid& grid)
    : x_(x) {
  const double d = static_cast<double>(std::max<Eigen::Index>(x.cols(), 1));
  std::vector<double> lengthscales;
  if (kind == BaselineKind::Rbf)
    for (double f : grid.lengthscale_factors) lengthscales.push_back(f * std::sqrt(d));
  else
    lengthscales.push_back(0.0);

  bool have = false;
  for (double l : lengthscales) {
    for (double a : grid.amplitudes) {
      BaselineChoice c{kind, l, a, 0.0, 0.0};
      const Matrix k = train_gram(c);
      for (double noise : grid.noises) {
        c.noise = noise;
        try {
          auto gp = std::make_unique<DenseGP>(k, y, noise, true);
          c.train_lml = gp->log_marginal_likelihood();
          if (!have || c.train_lml > choice_.train_lml) {
            choice_ = c;
            gp_ = std::move(gp);
            have = true;
          }
        } catch (const NumericalBreakdown&) {
          // Grid point numerically singular; skip it.
        }
      }
    }
  }
  if (!have) throw NumericalBreakdown("baseline grid: every grid point failed to factor");
}

Matrix BaselineModel::train_gram(const BaselineChoice& c) const {
  if (c.kind == BaselineKind::Rbf) return rbf_baseline_gram(x_, c.lengthscale, c.amplitude);
  return linear_baseline_gram(x_) * (c.amplitude / static_cast<double>(std::max<Eigen::Index>(x_.cols(), 1)));
}

Matrix BaselineModel::cross_gram(const RowMatrix& x_test) const {
  if (choice_.kind == BaselineKind::Rbf)
    return rbf_cross_gram(x_test, x_, choice_.lengthscale, choice_.amplitude);
  return linear_cross_gram(x_test, x_) *
         (choice_.amplitude / static_cast<double>(std::max<Eigen::Index>(x_.cols(), 1)));
}

Prediction BaselineModel::predict(const RowMatrix& x_test) const {
  Vector diag(x_test.rows());
  if (choice_.kind == BaselineKind::Rbf) {
    diag.setConstant(choice_.amplitude);
  } else {
    const double scale =
        choice_.amplitude / static_cast<double>(std::max<Eigen::Index>(x_.cols(), 1));
    for (Eigen::Index i = 0; i < x_test.rows(); ++i) diag[i] = scale * x_test.row(i).squaredNorm();
  }
  return gp_->predict(cross_gram(x_test), diag);
}

}  // namespace rpk
