#include "rpk/categorical.hpp"

#include "rpk/errors.hpp"
#include "rpk/seed.hpp"
#include "rpk/types.hpp"

#include <algorithm>
#include <random>

namespace rpk {

CategoricalPartition categorical_partition(const CategoricalColumn& column, std::size_t index) {
  if (column.empty()) throw ParameterError("categorical partition: empty column");
  std::vector<std::int64_t> raw(column.begin(), column.end());
  CategoricalPartition out{Partition::from_labels(raw), index, {}};
  for (std::size_t i = 0; i < column.size(); ++i) {
    const auto label = static_cast<std::int32_t>(out.partition.label(i));
    if (static_cast<std::size_t>(label) == out.code_labels.size())
      out.code_labels.emplace_back(column[i], label);
  }
  std::sort(out.code_labels.begin(), out.code_labels.end());
  return out;
}

PartitionEnsemble categorical_partitions(std::span<const CategoricalColumn> columns, std::size_t m,
                                         std::uint64_t seed) {
  if (columns.empty()) throw ParameterError("categorical partitions: empty column set");
  if (m < 1) throw ParameterError("categorical partitions: m must be >= 1");
  const auto n = columns.front().size();
  for (const auto& c : columns)
    if (c.size() != n) throw DimensionError("categorical partitions: columns differ in length");
  std::vector<Partition> parts;
  parts.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    auto rng = SamplerSeed{seed, i}.engine();
    std::uniform_int_distribution<std::size_t> pick(0, columns.size() - 1);
    parts.push_back(categorical_partition(columns[pick(rng)]).partition);
  }
  return PartitionEnsemble(std::move(parts));
}

std::vector<std::int32_t> categorical_extend(const CategoricalPartition& sample,
                                             const CategoricalColumn& test_codes) {
  std::vector<std::int32_t> out(test_codes.size(), kNoCluster);
  for (std::size_t t = 0; t < test_codes.size(); ++t) {
    auto it = std::lower_bound(sample.code_labels.begin(), sample.code_labels.end(),
                               std::pair<std::int32_t, std::int32_t>{test_codes[t], INT32_MIN});
    if (it != sample.code_labels.end() && it->first == test_codes[t]) out[t] = it->second;
  }
  return out;
}

}  // namespace rpk
