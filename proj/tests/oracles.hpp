#pragma once
// Independent reference implementations used by the tests. These build dense
// matrices straight from label arrays and never call the operator code.

#include "rpk/partition.hpp"
#include "rpk/types.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>
#include <vector>

namespace oracle {

using rpk::Matrix;
using rpk::Vector;

// 0/1 co-membership matrix of one partition.
inline Matrix comembership(const rpk::Partition& p) {
  const auto n = static_cast<Eigen::Index>(p.size());
  Matrix k = Matrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (p.label(static_cast<std::size_t>(a)) == p.label(static_cast<std::size_t>(b))) k(a, b) = 1.0;
  return k;
}

inline Matrix gram(const rpk::PartitionEnsemble& e, double jitter = 0.0) {
  const auto n = static_cast<Eigen::Index>(e.n());
  Matrix k = Matrix::Zero(n, n);
  for (const auto& p : e) k += comembership(p);
  k /= static_cast<double>(e.m());
  k.diagonal().array() += jitter;
  return k;
}

// Cross Gram from raw per-partition test labels (-1 = no training cluster).
inline Matrix cross_gram(const rpk::PartitionEnsemble& e, const std::vector<std::vector<std::int32_t>>& test) {
  const auto n_test = static_cast<Eigen::Index>(test.front().size());
  const auto n = static_cast<Eigen::Index>(e.n());
  Matrix k = Matrix::Zero(n_test, n);
  for (std::size_t r = 0; r < e.m(); ++r)
    for (Eigen::Index t = 0; t < n_test; ++t)
      for (Eigen::Index j = 0; j < n; ++j)
        if (test[r][static_cast<std::size_t>(t)] >= 0 &&
            static_cast<rpk::Label>(test[r][static_cast<std::size_t>(t)]) == e[r].label(static_cast<std::size_t>(j)))
          k(t, j) += 1.0;
  return k / static_cast<double>(e.m());
}

inline std::vector<rpk::Label> random_labels(std::size_t n, std::size_t max_clusters, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> kc(1, std::max<std::size_t>(1, std::min(n, max_clusters)));
  const std::size_t k = kc(rng);
  std::uniform_int_distribution<std::int64_t> lab(0, static_cast<std::int64_t>(k) - 1);
  std::vector<std::int64_t> raw(n);
  for (auto& l : raw) l = lab(rng);
  auto p = rpk::Partition::from_labels(raw);
  return {p.assignments().begin(), p.assignments().end()};
}

inline rpk::Partition random_partition(std::size_t n, std::size_t max_clusters, std::mt19937_64& rng) {
  return rpk::Partition(random_labels(n, max_clusters, rng));
}

inline std::shared_ptr<const rpk::PartitionEnsemble> random_ensemble(std::size_t n, std::size_t m,
                                                                     std::mt19937_64& rng) {
  std::vector<rpk::Partition> parts;
  std::uniform_int_distribution<std::size_t> mc(1, n);
  for (std::size_t i = 0; i < m; ++i) parts.push_back(random_partition(n, mc(rng), rng));
  return std::make_shared<const rpk::PartitionEnsemble>(std::move(parts));
}

inline Vector random_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector v(n);
  for (auto& x : v) x = g(rng);
  return v;
}

inline double min_eigenvalue(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double condition(const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

inline double rel_diff(const Vector& a, const Vector& b) {
  const double scale = std::max(b.norm(), std::numeric_limits<double>::min());
  return (a - b).norm() / scale;
}

// Exhaustive best split: every feature, every threshold between consecutive
// distinct values, gain = SSE(parent) - SSE(left) - SSE(right) by direct sums.
struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

inline double sse(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return s;
}

inline Split exhaustive_split(const rpk::RowMatrix& x, const Vector& y, const std::vector<std::uint32_t>& rows,
                              const std::vector<int>& features, int min_leaf) {
  Split best;
  std::vector<double> all;
  for (auto r : rows) all.push_back(y[r]);
  const double parent = sse(all);
  for (int f : features) {
    std::vector<double> values;
    for (auto r : rows) values.push_back(x(r, f));
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t i = 0; i + 1 < values.size(); ++i) {
      const double t = 0.5 * (values[i] + values[i + 1]);
      std::vector<double> l, r;
      for (auto row : rows) (x(row, f) <= t ? l : r).push_back(y[row]);
      if (static_cast<int>(l.size()) < min_leaf || static_cast<int>(r.size()) < min_leaf) continue;
      const double gain = parent - sse(l) - sse(r);
      if (gain > best.gain) best = {f, t, gain};
    }
  }
  return best;
}

}  // namespace oracle
