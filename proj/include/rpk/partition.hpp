#pragma once

#include "rpk/types.hpp"

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rpk {

// A segmentation of N points into non-empty, non-overlapping clusters with
// contiguous labels 0..n_clusters-1. Immutable once built; the inverse index
// (members of each cluster) is materialized eagerly so instances can be
// shared across threads.
class Partition {
 public:
  Partition() = default;

  // Takes contiguous labels as-is; throws DataError if some label in
  // [0, max] is unused.
  explicit Partition(std::vector<Label> assignments);

  // Relabels arbitrary integer labels by order of first appearance.
  static Partition from_labels(std::span<const std::int64_t> raw);
  static Partition single_cluster(std::size_t n);
  static Partition singletons(std::size_t n);

  std::size_t size() const noexcept { return assignments_.size(); }
  std::size_t n_clusters() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }

  Label label(std::size_t i) const { return assignments_[i]; }
  std::span<const Label> assignments() const noexcept { return assignments_; }

  std::span<const std::uint32_t> members(Label c) const {
    return {members_.data() + offsets_[c], members_.data() + offsets_[c + 1]};
  }
  std::uint32_t cluster_size(Label c) const { return offsets_[c + 1] - offsets_[c]; }

  // True when every cluster of *this is contained in a cluster of coarser.
  bool refines(const Partition& coarser) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.assignments_ == b.assignments_;
  }

 private:
  void build_index();

  std::vector<Label> assignments_;
  std::vector<std::uint32_t> offsets_;
  std::vector<std::uint32_t> members_;
};

// m partitions over the same N points.
class PartitionEnsemble {
 public:
  explicit PartitionEnsemble(std::vector<Partition> partitions);

  std::size_t m() const noexcept { return partitions_.size(); }
  std::size_t n() const noexcept { return n_; }

  const Partition& operator[](std::size_t i) const { return partitions_[i]; }
  auto begin() const { return partitions_.begin(); }
  auto end() const { return partitions_.end(); }

  friend bool operator==(const PartitionEnsemble&, const PartitionEnsemble&) = default;

 private:
  std::vector<Partition> partitions_;
  std::size_t n_ = 0;
};

// (K_p v)_i = sum of v over the cluster of i. O(N).
Vector partition_matvec(const Partition& p, const Vector& v);

// Exact solve of (K_p + sigma I) x = v in O(N):
//   x_i = (v_i - S_c / (|c| + sigma)) / sigma,  S_c = sum of v over cluster c.
Vector partition_block_solve(const Partition& p, double sigma, const Vector& v);

namespace detail {
// Raw kernels shared by the ensemble operators. cluster_buf is scratch of at
// least n_clusters entries.
void partition_matvec_into(const Partition& p, const double* v, double* out,
                           std::vector<double>& cluster_buf);
void partition_block_solve_into(const Partition& p, double sigma, const double* v, double* out,
                                std::vector<double>& cluster_buf);
}  // namespace detail

// Versioned binary ensemble format:
//   "RPKE" | u32 version | u64 m | u64 n | u64 provenance bytes | provenance
//   then per partition: u32 n_clusters | n x u32 labels
// All integers little-endian.
inline constexpr std::uint32_t kEnsembleFormatVersion = 1;

struct EnsembleFile {
  PartitionEnsemble ensemble;
  std::string provenance;
};

void write_ensemble(std::ostream& out, const PartitionEnsemble& ensemble,
                    const std::string& provenance = {});
EnsembleFile read_ensemble(std::istream& in);

}  // namespace rpk
