#pragma once

#include "rpk/partition.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rpk {

// Category code of every item; codes need not be contiguous.
using CategoricalColumn = std::vector<std::int32_t>;

struct CategoricalPartition {
  Partition partition;
  std::size_t column = 0;
  // (code, label) pairs, sorted by code, for extending to new items.
  std::vector<std::pair<std::int32_t, std::int32_t>> code_labels;
};

// Clusters are the category classes of the given column.
CategoricalPartition categorical_partition(const CategoricalColumn& column, std::size_t index = 0);

// Each sample picks one column uniformly at random.
PartitionEnsemble categorical_partitions(std::span<const CategoricalColumn> columns, std::size_t m,
                                         std::uint64_t seed);

// Labels for new items given their code in the sampled column; codes absent
// from training get kNoCluster.
std::vector<std::int32_t> categorical_extend(const CategoricalPartition& sample,
                                             const CategoricalColumn& test_codes);

}  // namespace rpk
