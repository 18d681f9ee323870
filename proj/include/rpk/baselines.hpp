#pragma once

#include "rpk/gp.hpp"
#include "rpk/gram.hpp"

#include <Eigen/Cholesky>
#include <memory>

#include <string>
#include <vector>

namespace rpk {

// k(a, b) = amplitude * exp(-|a - b|^2 / (2 lengthscale^2))
Matrix rbf_baseline_gram(const RowMatrix& x, double lengthscale, double amplitude,
                         std::size_t cap = kDefaultDenseCap);
Matrix rbf_cross_gram(const RowMatrix& a, const RowMatrix& b, double lengthscale,
                      double amplitude, std::size_t cap = kDefaultDenseCap);
// k(a, b) = a . b
Matrix linear_baseline_gram(const RowMatrix& x, std::size_t cap = kDefaultDenseCap);
Matrix linear_cross_gram(const RowMatrix& a, const RowMatrix& b, std::size_t cap = kDefaultDenseCap);

// Exact GP on a dense Gram matrix via Cholesky.
class DenseGP {
 public:
  DenseGP(const Matrix& k, const Vector& y, double noise, bool standardize_targets);

  double log_marginal_likelihood() const noexcept { return lml_; }
  double noise() const noexcept { return noise_; }
  const Vector& alpha() const noexcept { return alpha_; }
  // k_cross: test x train; k_diag: prior variance of each test point.
  Prediction predict(const Matrix& k_cross, const Vector& k_diag) const;

 private:
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
  double noise_;
  double y_mean_ = 0.0;
  double y_scale_ = 1.0;
  double lml_ = 0.0;
};

enum class BaselineKind { Rbf, Linear };

// Fixed log-spaced hyperparameter grid. RBF lengthscales are multiples of
// sqrt(D); the linear kernel ignores lengthscales and uses amplitude / D.
struct BaselineGrid {
  std::vector<double> lengthscale_factors{0.1, 0.316, 1.0, 3.16, 10.0};
  std::vector<double> amplitudes{0.3, 1.0, 3.0};
  std::vector<double> noises{1e-3, 5.6e-3, 3.2e-2, 0.178, 1.0};
};

struct BaselineChoice {
  BaselineKind kind = BaselineKind::Rbf;
  double lengthscale = 0.0;
  double amplitude = 1.0;
  double noise = 1.0;
  double train_lml = 0.0;
};

std::string to_string(BaselineKind kind);

// Grid search by training log marginal likelihood on standardized targets.
class BaselineModel {
 public:
  BaselineModel(BaselineKind kind, const RowMatrix& x, const Vector& y, const BaselineGrid& grid = {});

  const BaselineChoice& choice() const noexcept { return choice_; }
  Prediction predict(const RowMatrix& x_test) const;

 private:
  Matrix train_gram(const BaselineChoice& c) const;
  Matrix cross_gram(const RowMatrix& x_test) const;

  RowMatrix x_;
  BaselineChoice choice_;
  std::unique_ptr<DenseGP> gp_;
};

}  // namespace rpk
