#pragma once

#include "rpk/gram.hpp"
#include "rpk/linalg.hpp"

#include <memory>

namespace rpk {

// Kernel PCA on H K H (H = I - 11'/N), with the centering applied around each
// operator product so K is never materialized.
class KPCAModel {
 public:
  const Vector& eigenvalues() const noexcept { return eigenvalues_; }
  const Matrix& eigenvectors() const noexcept { return eigenvectors_; }
  const Vector& row_means() const noexcept { return row_means_; }
  double grand_mean() const noexcept { return grand_mean_; }
  const EigenResult& solver() const noexcept { return solver_; }
  int k() const noexcept { return static_cast<int>(eigenvalues_.size()); }

  // Training coordinates: the projection of the training rows, equal to
  // sqrt(lambda_c) v_c up to the eigensolver residual.
  Matrix training_coordinates() const;

 private:
  friend KPCAModel kpca_fit(std::shared_ptr<const PartitionEnsemble>, int, const EigenOptions&);
  friend Matrix kpca_project(const KPCAModel&, const CrossKernel&);

  std::shared_ptr<const PartitionEnsemble> ensemble_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  Vector row_means_;
  double grand_mean_ = 0.0;
  Matrix training_coords_;
  EigenResult solver_;
};

// The centered operator, exposed for diagnostics and oracles.
LinearOperator centered_operator(const GramOperator& gram);

KPCAModel kpca_fit(std::shared_ptr<const PartitionEnsemble> ensemble, int k,
                   const EigenOptions& options = {});

// Out-of-sample projection with test-side centering from the stored
// training statistics. Returns M x k coordinates.
Matrix kpca_project(const KPCAModel& model, const CrossKernel& cross);

// Dense reference path (used for the RBF kernel): full symmetric
// eigendecomposition of the centered Gram, top-k coordinates.
Matrix dense_kpca_coordinates(const Matrix& gram, int k, Vector* eigenvalues = nullptr);

}  // namespace rpk
