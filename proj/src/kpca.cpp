#include "rpk/kpca.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace rpk {

namespace {

// Coordinates along components with numerically zero variance are 0.
constexpr double kZeroEigenvalue = 1e-12;

void center(Vector& v) { v.array() -= v.mean(); }

}  // namespace

LinearOperator centered_operator(const GramOperator& gram) {
  auto g = std::make_shared<const GramOperator>(gram.with_jitter(0.0));
  LinearOperator op;
  op.dim = static_cast<Eigen::Index>(gram.n());
  op.apply = [g](const Vector& v) {
    Vector c = v;
    center(c);
    Vector w = g->apply(c);
    center(w);
    return w;
  };
  return op;
}

Matrix KPCAModel::training_coordinates() const { return training_coords_; }

KPCAModel kpca_fit(std::shared_ptr<const PartitionEnsemble> ensemble, int k,
                   const EigenOptions& options) {
  if (!ensemble) throw ParameterError("kpca_fit: null ensemble");
  if (k < 1 || static_cast<std::size_t>(k) > ensemble->n())
    throw ParameterError("kpca_fit: k must lie in [1, N]");
  KPCAModel model;
  model.ensemble_ = ensemble;
  const GramOperator gram(ensemble);
  EigenOptions opt = options;
  opt.center_start = true;
  model.solver_ = power_topk(centered_operator(gram), k, opt);
  model.eigenvalues_ = model.solver_.values.cwiseMax(0.0);
  model.eigenvectors_ = model.solver_.vectors;
  const auto n = static_cast<double>(ensemble->n());
  model.row_means_ = gram.apply(Vector::Ones(static_cast<Eigen::Index>(ensemble->n()))) / n;
  model.grand_mean_ = model.row_means_.mean();
  // H K H v / sqrt(lambda) rather than sqrt(lambda) v, so training rows
  // project onto exactly these coordinates whatever the eigen residual.
  const auto op = centered_operator(gram);
  model.training_coords_ = Matrix::Zero(model.eigenvectors_.rows(), model.eigenvectors_.cols());
  for (Eigen::Index c = 0; c < model.eigenvectors_.cols(); ++c) {
    const double l = model.eigenvalues_[c];
    if (l > kZeroEigenvalue) model.training_coords_.col(c) = op.apply(model.eigenvectors_.col(c)) / std::sqrt(l);
  }
  return model;
}

Matrix kpca_project(const KPCAModel& model, const CrossKernel& cross) {
  if (cross.n_train() != model.ensemble_->n() || cross.m() != model.ensemble_->m())
    throw DataError("kpca_project: cross kernel does not match the fitted ensemble");
  const auto n = static_cast<Eigen::Index>(cross.n_train());
  const auto k = model.eigenvectors_.cols();
  // Centered cross kernel: k~(t, j) = k(t, j) - mean_j' k(t, j') - r_j + g.
  const Vector test_means = cross.apply(Vector::Ones(n)) / static_cast<double>(n);
  Matrix out(static_cast<Eigen::Index>(cross.n_test()), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const Vector v = model.eigenvectors_.col(c);
    const double sum_v = v.sum();
    const double r_dot_v = model.row_means_.dot(v);
    Vector proj = cross.apply(v);
    proj.array() -= test_means.array() * sum_v;
    proj.array() += model.grand_mean_ * sum_v - r_dot_v;
    const double l = model.eigenvalues_[c];
    out.col(c) = l > kZeroEigenvalue ? Vector(proj / std::sqrt(l)) : Vector::Zero(proj.size());
  }
  return out;
}

Matrix dense_kpca_coordinates(const Matrix& gram, int k, Vector* eigenvalues) {
  const auto n = gram.rows();
  if (k < 1 || k > n) throw ParameterError("dense kpca: k out of range");
  Matrix c = gram;
  const Vector row_means = c.rowwise().mean();
  const double grand = row_means.mean();
  c.colwise() -= row_means;
  c.rowwise() -= row_means.transpose();
  c.array() += grand;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(c);
  Matrix coords(n, k);
  Vector vals(k);
  for (int i = 0; i < k; ++i) {
    const double l = std::max(eig.eigenvalues()[n - 1 - i], 0.0);
    vals[i] = l;
    coords.col(i) = eig.eigenvectors().col(n - 1 - i) * (l > kZeroEigenvalue ? std::sqrt(l) : 0.0);
  }
  if (eigenvalues) *eigenvalues = vals;
  return coords;
}

}  // namespace rpk
