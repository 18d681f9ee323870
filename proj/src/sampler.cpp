#include "rpk/sampler.hpp"

#include "rpk/errors.hpp"
#include "rpk/threading.hpp"

namespace rpk {

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::RandomForest:
      return "rf";
    case SamplerKind::FastCluster:
      return "fastcluster";
    case SamplerKind::Categorical:
      return "categorical";
  }
  return "unknown";
}

SamplerKind sampler_kind_from_string(const std::string& name) {
  if (name == "rf") return SamplerKind::RandomForest;
  if (name == "fastcluster") return SamplerKind::FastCluster;
  if (name == "categorical") return SamplerKind::Categorical;
  throw ParameterError("unknown sampler kind '" + name + "'");
}

nlohmann::json SamplerSpec::to_json() const {
  return {{"kind", to_string(kind)},
          {"seed", seed},
          {"tree",
           {{"mtry", tree.mtry},
            {"bootstrap", tree.bootstrap},
            {"min_leaf", tree.min_leaf},
            {"max_depth", tree.max_depth}}},
          {"fast_cluster", {{"h", fast_cluster.h}, {"dim_keep_prob", fast_cluster.dim_keep_prob}}}};
}

SamplerSpec SamplerSpec::from_json(const nlohmann::json& j) {
  SamplerSpec s;
  s.kind = sampler_kind_from_string(j.at("kind").get<std::string>());
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("tree")) {
    const auto& t = j.at("tree");
    s.tree.mtry = t.value("mtry", s.tree.mtry);
    s.tree.bootstrap = t.value("bootstrap", s.tree.bootstrap);
    s.tree.min_leaf = t.value("min_leaf", s.tree.min_leaf);
    s.tree.max_depth = t.value("max_depth", s.tree.max_depth);
  }
  if (j.contains("fast_cluster")) {
    const auto& f = j.at("fast_cluster");
    s.fast_cluster.h = f.value("h", s.fast_cluster.h);
    s.fast_cluster.dim_keep_prob = f.value("dim_keep_prob", s.fast_cluster.dim_keep_prob);
  }
  return s;
}

std::size_t SamplerInput::rows() const {
  if (features) return static_cast<std::size_t>(features->rows());
  if (columns && !columns->empty()) return columns->front().size();
  return 0;
}

namespace {

class TreeExtension final : public PartitionExtension {
 public:
  TreeExtension(std::shared_ptr<const TreeModel> tree, int depth)
      : tree_(std::move(tree)), depth_(depth) {}
  std::vector<std::int32_t> extend(const SamplerInput& test) const override {
    if (!test.features) throw DataError("tree extension needs test features");
    return rf_extend(*tree_, *test.features, depth_);
  }

 private:
  std::shared_ptr<const TreeModel> tree_;
  int depth_;
};

class CenterExtension final : public PartitionExtension {
 public:
  explicit CenterExtension(CenterSet centers) : centers_(std::move(centers)) {}
  std::vector<std::int32_t> extend(const SamplerInput& test) const override {
    if (!test.features) throw DataError("fast cluster extension needs test features");
    return fast_cluster_extend(centers_, *test.features);
  }

 private:
  CenterSet centers_;
};

class CategoryExtension final : public PartitionExtension {
 public:
  explicit CategoryExtension(CategoricalPartition sample) : sample_(std::move(sample)) {}
  std::vector<std::int32_t> extend(const SamplerInput& test) const override {
    if (!test.columns || sample_.column >= test.columns->size())
      throw DataError("categorical extension needs the same categorical columns");
    return categorical_extend(sample_, (*test.columns)[sample_.column]);
  }

 private:
  CategoricalPartition sample_;
};

struct Sample {
  Partition partition;
  std::shared_ptr<const PartitionExtension> extension;
};

Sample draw(const SamplerSpec& spec, const SamplerInput& in, std::size_t index) {
  const SamplerSeed seed{spec.seed, index};
  switch (spec.kind) {
    case SamplerKind::RandomForest: {
      auto rng = seed.engine();
      // Tree training gets its own sub-stream; depth comes from this one.
      auto tree = std::make_shared<const TreeModel>(
          train_rf_tree(*in.features, *in.target, {spec.seed ^ 0x7265ULL, index}, spec.tree));
      const int depth = sample_depth(*tree, rng);
      Partition p = rf_partition_at_depth(*tree, depth);
      return {std::move(p), std::make_shared<TreeExtension>(std::move(tree), depth)};
    }
    case SamplerKind::FastCluster: {
      auto res = fast_cluster_partition(*in.features, spec.fast_cluster, seed);
      return {std::move(res.partition), std::make_shared<CenterExtension>(std::move(res.centers))};
    }
    case SamplerKind::Categorical: {
      auto rng = seed.engine();
      std::uniform_int_distribution<std::size_t> pick(0, in.columns->size() - 1);
      const std::size_t col = pick(rng);
      auto cp = categorical_partition((*in.columns)[col], col);
      Partition p = cp.partition;
      return {std::move(p), std::make_shared<CategoryExtension>(std::move(cp))};
    }
  }
  throw ParameterError("unknown sampler kind");
}

}  // namespace

CrossKernel SampledEnsemble::extend(const SamplerInput& test) const {
  std::vector<std::vector<std::int32_t>> labels(extensions.size());
  parallel_for(extensions.size(), [&](std::size_t i) { labels[i] = extensions[i]->extend(test); });
  return CrossKernel(ensemble, std::move(labels));
}

SampledEnsemble sample_ensemble(const SamplerSpec& spec, const SamplerInput& input, std::size_t m) {
  if (m < 1) throw ParameterError("sample_ensemble: m must be >= 1");
  switch (spec.kind) {
    case SamplerKind::RandomForest:
      if (!input.features || !input.target)
        throw ParameterError("random forest sampler needs features and a target");
      break;
    case SamplerKind::FastCluster:
      if (!input.features) throw ParameterError("fast cluster sampler needs features");
      break;
    case SamplerKind::Categorical:
      if (!input.columns || input.columns->empty())
        throw ParameterError("categorical sampler: empty column set");
      break;
  }
  std::vector<Sample> samples(m);
  parallel_for(m, [&](std::size_t i) { samples[i] = draw(spec, input, i); });
  SampledEnsemble out;
  out.spec = spec;
  std::vector<Partition> parts;
  parts.reserve(m);
  out.extensions.reserve(m);
  for (auto& s : samples) {
    parts.push_back(std::move(s.partition));
    out.extensions.push_back(std::move(s.extension));
  }
  out.ensemble = std::make_shared<const PartitionEnsemble>(std::move(parts));
  return out;
}

}  // namespace rpk
