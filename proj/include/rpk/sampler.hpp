#pragma once

#include "rpk/categorical.hpp"
#include "rpk/fast_cluster.hpp"
#include "rpk/gram.hpp"
#include "rpk/tree.hpp"

#include <json.hpp>

#include <memory>
#include <string>
#include <vector>

namespace rpk {

enum class SamplerKind { RandomForest, FastCluster, Categorical };

std::string to_string(SamplerKind kind);
SamplerKind sampler_kind_from_string(const std::string& name);

// Structured sampler configuration, serialized next to every ensemble.
struct SamplerSpec {
  SamplerKind kind = SamplerKind::FastCluster;
  TreeConfig tree;
  FastClusterConfig fast_cluster;
  std::uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SamplerSpec from_json(const nlohmann::json& j);
};

// Inputs a sampler may read. Random Forest needs features and target, Fast
// Cluster needs features, the categorical sampler needs columns.
struct SamplerInput {
  const RowMatrix* features = nullptr;
  const Vector* target = nullptr;
  const std::vector<CategoricalColumn>* columns = nullptr;

  std::size_t rows() const;
};

// Out-of-sample rule for one ensemble member.
class PartitionExtension {
 public:
  virtual ~PartitionExtension() = default;
  virtual std::vector<std::int32_t> extend(const SamplerInput& test) const = 0;
};

struct SampledEnsemble {
  std::shared_ptr<const PartitionEnsemble> ensemble;
  std::vector<std::shared_ptr<const PartitionExtension>> extensions;
  SamplerSpec spec;

  // Pairs the training ensemble with labels for the given test inputs.
  CrossKernel extend(const SamplerInput& test) const;
};

// m independent partitions; sample i draws only from stream i of spec.seed,
// so the result does not depend on the thread count. For Random Forest each
// sample trains a fresh tree (bootstrap + feature subsampling) and then picks
// a depth.
SampledEnsemble sample_ensemble(const SamplerSpec& spec, const SamplerInput& input, std::size_t m);

}  // namespace rpk
