#include "rpk/gram.hpp"

#include "rpk/errors.hpp"
#include "rpk/linalg.hpp"
#include "rpk/threading.hpp"

#include <string>
#include <thread>

namespace rpk {

namespace detail {

namespace {

using Term = std::function<void(std::size_t, double*, std::vector<double>&)>;

// One scratch vector per tree level, sized up front so references stay valid
// while deeper levels recurse.
struct Workspace {
  Workspace(std::size_t depth, std::size_t n) : levels(depth, Vector(static_cast<Eigen::Index>(n))) {}
  std::vector<Vector> levels;
  std::vector<double> cluster_buf;
};

std::size_t tree_depth(std::size_t count) {
  std::size_t d = 1;
  while ((std::size_t{1} << d) < count) ++d;
  return d + 1;
}

void sum_range(std::size_t lo, std::size_t hi, double* out, std::size_t n, const Term& term,
               Workspace& ws, std::size_t level, std::size_t parallel_levels) {
  if (hi - lo == 1) {
    term(lo, out, ws.cluster_buf);
    return;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  Vector& right = ws.levels[level];
  if (level < parallel_levels) {
    Workspace right_ws(ws.levels.size(), n);
    std::exception_ptr error;
    std::thread worker([&] {
      try {
        sum_range(mid, hi, right.data(), n, term, right_ws, level + 1, parallel_levels);
      } catch (...) {
        error = std::current_exception();
      }
    });
    try {
      sum_range(lo, mid, out, n, term, ws, level + 1, parallel_levels);
    } catch (...) {
      worker.join();
      throw;
    }
    worker.join();
    if (error) std::rethrow_exception(error);
  } else {
    sum_range(lo, mid, out, n, term, ws, level + 1, parallel_levels);
    sum_range(mid, hi, right.data(), n, term, ws, level + 1, parallel_levels);
  }
  Eigen::Map<Vector>(out, static_cast<Eigen::Index>(n)) += right;
}

}  // namespace

Vector pairwise_sum(std::size_t count, std::size_t n, const Term& term) {
  Vector out(static_cast<Eigen::Index>(n));
  if (count == 0) {
    out.setZero();
    return out;
  }
  std::size_t parallel_levels = 0;
  // Only split across threads when each term carries enough work.
  if (n >= 4096)
    while ((std::size_t{2} << parallel_levels) <= thread_limit() && parallel_levels < 6)
      ++parallel_levels;
  Workspace ws(tree_depth(count), n);
  sum_range(0, count, out.data(), n, term, ws, 0, parallel_levels);
  return out;
}

}  // namespace detail

GramOperator::GramOperator(std::shared_ptr<const PartitionEnsemble> ensemble, double jitter,
                           std::optional<double> precond_sigma)
    : ensemble_(std::move(ensemble)), jitter_(jitter), precond_sigma_(precond_sigma) {
  if (!ensemble_) throw ParameterError("GramOperator: null ensemble");
  if (!(jitter_ >= 0.0)) throw ParameterError("GramOperator: jitter must be non-negative");
  if (precond_sigma_ && !(*precond_sigma_ > 0.0))
    throw ParameterError("GramOperator: preconditioner sigma must be positive");
}

GramOperator GramOperator::with_jitter(double jitter) const {
  return GramOperator(ensemble_, jitter, precond_sigma_);
}

Vector GramOperator::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != n())
    throw DimensionError("gram_matvec: vector length " + std::to_string(v.size()) +
                         " != " + std::to_string(n()));
  const auto& ens = *ensemble_;
  Vector out = detail::pairwise_sum(
      ens.m(), n(), [&](std::size_t i, double* dst, std::vector<double>& buf) {
        detail::partition_matvec_into(ens[i], v.data(), dst, buf);
      });
  out /= static_cast<double>(m());
  if (jitter_ != 0.0) out += jitter_ * v;
  return out;
}

Vector GramOperator::apply_preconditioner(const Vector& v) const {
  const double sigma = precond_sigma();
  if (!(sigma > 0.0))
    throw ParameterError("precond_matvec: preconditioner needs a positive sigma (jitter is 0)");
  if (static_cast<std::size_t>(v.size()) != n())
    throw DimensionError("precond_matvec: vector length mismatch");
  const auto& ens = *ensemble_;
  Vector out = detail::pairwise_sum(
      ens.m(), n(), [&](std::size_t i, double* dst, std::vector<double>& buf) {
        detail::partition_block_solve_into(ens[i], sigma, v.data(), dst, buf);
      });
  out /= static_cast<double>(m());
  return out;
}

Matrix GramOperator::dense(std::size_t cap) const {
  if (n() > cap)
    throw ResourceError("gram_dense: N = " + std::to_string(n()) + " exceeds dense cap " +
                        std::to_string(cap));
  const auto N = static_cast<Eigen::Index>(n());
  Matrix counts = Matrix::Zero(N, N);
  for (const auto& p : *ensemble_) {
    for (Label c = 0; c < p.n_clusters(); ++c) {
      const auto members = p.members(c);
      for (auto a : members)
        for (auto b : members) counts(a, b) += 1.0;
    }
  }
  counts /= static_cast<double>(m());
  counts.diagonal().array() += jitter_;
  return counts;
}

LinearOperator GramOperator::as_operator(bool with_preconditioner) const {
  LinearOperator op;
  op.dim = static_cast<Eigen::Index>(n());
  auto self = std::make_shared<const GramOperator>(*this);
  op.apply = [self](const Vector& v) { return self->apply(v); };
  if (with_preconditioner) {
    if (!(precond_sigma() > 0.0))
      throw ParameterError("preconditioner requested but sigma is 0");
    op.precondition = [self](const Vector& v) { return self->apply_preconditioner(v); };
  }
  return op;
}

CrossKernel::CrossKernel(std::shared_ptr<const PartitionEnsemble> train,
                         std::vector<std::vector<std::int32_t>> test_labels)
    : train_(std::move(train)), test_labels_(std::move(test_labels)) {
  if (!train_) throw ParameterError("CrossKernel: null ensemble");
  if (test_labels_.size() != train_->m())
    throw DataError("cross_matvec: need one test labelling per partition (" +
                    std::to_string(train_->m()) + "), got " +
                    std::to_string(test_labels_.size()));
  n_test_ = test_labels_.front().size();
  for (std::size_t p = 0; p < test_labels_.size(); ++p) {
    const auto& labels = test_labels_[p];
    if (labels.size() != n_test_) throw DataError("cross_matvec: ragged test labellings");
    const auto k = static_cast<std::int64_t>((*train_)[p].n_clusters());
    for (auto l : labels)
      if (l != kNoCluster && (l < 0 || l >= k))
        throw DataError("cross_matvec: test label " + std::to_string(l) +
                        " outside partition " + std::to_string(p) + "'s label space");
  }
}

Vector CrossKernel::apply(const Vector& v) const {
  if (static_cast<std::size_t>(v.size()) != n_train())
    throw DimensionError("cross_matvec: vector length mismatch");
  const auto& ens = *train_;
  Vector out = detail::pairwise_sum(
      ens.m(), n_test_, [&](std::size_t i, double* dst, std::vector<double>& buf) {
        const auto& p = ens[i];
        const auto labels = p.assignments();
        buf.assign(p.n_clusters(), 0.0);
        for (std::size_t j = 0; j < labels.size(); ++j) buf[labels[j]] += v[j];
        const auto& test = test_labels_[i];
        for (std::size_t t = 0; t < n_test_; ++t)
          dst[t] = test[t] == kNoCluster ? 0.0 : buf[static_cast<std::size_t>(test[t])];
      });
  out /= static_cast<double>(m());
  return out;
}

Vector CrossKernel::row(std::size_t t) const {
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n_train()));
  for (std::size_t p = 0; p < m(); ++p) {
    const auto l = test_labels_[p][t];
    if (l == kNoCluster) continue;
    for (auto j : (*train_)[p].members(static_cast<Label>(l))) out[j] += 1.0;
  }
  out /= static_cast<double>(m());
  return out;
}

Matrix CrossKernel::dense(std::size_t cap) const {
  if (n_test_ > cap || n_train() > cap) throw ResourceError("cross kernel exceeds dense cap");
  Matrix out(static_cast<Eigen::Index>(n_test_), static_cast<Eigen::Index>(n_train()));
  for (std::size_t t = 0; t < n_test_; ++t) out.row(static_cast<Eigen::Index>(t)) = row(t);
  return out;
}

}  // namespace rpk
