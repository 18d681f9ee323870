#pragma once

#include "rpk/partition.hpp"
#include "rpk/types.hpp"

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

namespace rpk {

struct LinearOperator;

inline constexpr std::size_t kDefaultDenseCap = 10'000;

// Matrix-free view of the m-approximate partition kernel
//   K = (1/m) sum_p K_p + jitter * I
// with the approximate inverse
//   B v = (1/m) sum_p (K_p + sigma I)^{-1} v,   sigma = precond_sigma (defaults to jitter).
// Sums over partitions use a fixed pairwise tree, so results are bitwise
// identical for any thread count.
class GramOperator {
 public:
  explicit GramOperator(std::shared_ptr<const PartitionEnsemble> ensemble, double jitter = 0.0,
                        std::optional<double> precond_sigma = std::nullopt);

  std::size_t n() const noexcept { return ensemble_->n(); }
  std::size_t m() const noexcept { return ensemble_->m(); }
  double jitter() const noexcept { return jitter_; }
  double precond_sigma() const noexcept { return precond_sigma_.value_or(jitter_); }
  const PartitionEnsemble& ensemble() const noexcept { return *ensemble_; }
  std::shared_ptr<const PartitionEnsemble> ensemble_ptr() const noexcept { return ensemble_; }

  GramOperator with_jitter(double jitter) const;

  Vector apply(const Vector& v) const;
  Vector apply_preconditioner(const Vector& v) const;
  Matrix dense(std::size_t cap = kDefaultDenseCap) const;

  // Handle for the iterative solvers; the preconditioner is attached only
  // when requested (and requires a positive sigma).
  LinearOperator as_operator(bool with_preconditioner) const;

 private:
  std::shared_ptr<const PartitionEnsemble> ensemble_;
  double jitter_;
  std::optional<double> precond_sigma_;
};

// Out-of-sample pairing of a training ensemble with test-point labels: for
// each partition, the label of every test point in that partition's label
// space, or kNoCluster when its cluster contains no training point.
class CrossKernel {
 public:
  CrossKernel(std::shared_ptr<const PartitionEnsemble> train,
              std::vector<std::vector<std::int32_t>> test_labels);

  std::size_t n_train() const noexcept { return train_->n(); }
  std::size_t n_test() const noexcept { return n_test_; }
  std::size_t m() const noexcept { return train_->m(); }
  std::int32_t test_label(std::size_t partition, std::size_t t) const {
    return test_labels_[partition][t];
  }

  // out_t = (1/m) sum_p sum_{train j in p(t)} v_j. No jitter on cross terms.
  Vector apply(const Vector& v) const;
  // Row t of the cross Gram matrix: k(x_t, x_j) for every training point j.
  Vector row(std::size_t t) const;
  Matrix dense(std::size_t cap = kDefaultDenseCap) const;

 private:
  std::shared_ptr<const PartitionEnsemble> train_;
  std::vector<std::vector<std::int32_t>> test_labels_;
  std::size_t n_test_ = 0;
};

namespace detail {
// Fixed-order pairwise sum over count terms of length n. term(i, out, scratch)
// overwrites out with term i. Subtrees near the root may run on separate
// threads; the tree shape never depends on the thread count.
Vector pairwise_sum(std::size_t count, std::size_t n,
                    const std::function<void(std::size_t, double*, std::vector<double>&)>& term);
}  // namespace detail

}  // namespace rpk
