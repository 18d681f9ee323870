#pragma once

#include "rpk/partition.hpp"
#include "rpk/seed.hpp"
#include "rpk/types.hpp"

#include <cstdint>
#include <vector>

namespace rpk {

struct FastClusterConfig {
  int h = -1;  // max center exponent; negative means ceil(log2 N)
  double dim_keep_prob = 0.5;

  void validate() const;
  int resolved_h(std::size_t n) const;
};

// Stored centers and dimension mask of one Fast Cluster sample; enough to
// assign new rows to the sample's clusters.
struct CenterSet {
  std::vector<int> dims;                   // kept dimensions, ascending
  RowMatrix coords;                        // centers x dims.size(), masked coordinates
  std::vector<std::uint32_t> center_rows;  // training row of each center, ascending
  std::vector<std::int32_t> center_label;  // cluster label per center, kNoCluster if unused
  std::size_t n_features = 0;
};

struct FastClusterResult {
  Partition partition;
  CenterSet centers;
  int exponent = 0;  // s: 2^s centers requested
};

// Nearest center (masked Euclidean) for each row of x; ties go to the lowest
// center index. Large center sets are searched with a kd-tree whose distance
// arithmetic matches the plain scan exactly.
std::vector<std::uint32_t> nearest_centers(const CenterSet& centers, const RowMatrix& x);

// Deterministic core: assign every row of x to the nearest of the given
// center rows under the given dimension mask.
FastClusterResult fast_cluster_assign(const RowMatrix& x, std::vector<int> dims,
                                      std::vector<std::uint32_t> center_rows);

FastClusterResult fast_cluster_partition(const RowMatrix& x, const FastClusterConfig& config,
                                         SamplerSeed seed);

std::vector<std::int32_t> fast_cluster_extend(const CenterSet& centers, const RowMatrix& x_test);

}  // namespace rpk
