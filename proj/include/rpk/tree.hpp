#pragma once

#include "rpk/partition.hpp"
#include "rpk/seed.hpp"
#include "rpk/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace rpk {

struct TreeConfig {
  int mtry = 0;  // features tried per split; 0 means ceil(D / 3)
  bool bootstrap = true;
  int min_leaf = 5;
  int max_depth = 0;  // 0 means ceil(log2 N)

  int resolved_mtry(std::size_t d) const;
  int resolved_max_depth(std::size_t n) const;
};

struct TreeNode {
  int feature = -1;  // -1 for leaves
  double threshold = 0.0;  // rows with x[feature] <= threshold go left
  int left = -1;
  int right = -1;
  int parent = -1;
  int depth = 0;
  double gain = 0.0;  // SSE reduction of the split
  std::uint32_t n_samples = 0;  // training rows (with bootstrap multiplicity) at the node

  bool is_leaf() const noexcept { return feature < 0; }
};

// A trained CART regression tree. Nodes are stored in depth-first preorder,
// so every parent precedes its children.
class TreeModel {
 public:
  TreeModel(std::vector<TreeNode> nodes, std::vector<int> leaf_of_point, int max_depth,
            std::size_t n_features);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const std::vector<int>& leaf_of_point() const noexcept { return leaf_of_point_; }
  std::size_t n_points() const noexcept { return leaf_of_point_.size(); }
  std::size_t n_features() const noexcept { return n_features_; }
  int max_depth() const noexcept { return max_depth_; }
  std::size_t n_leaves() const;
  // True when no split was possible and the tree is a lone root.
  bool degenerate() const noexcept { return nodes_.size() == 1; }

  int route(std::span<const double> row) const;
  // Ancestor of node at depth d, or the node itself if it is shallower.
  int ancestor(int node, int depth) const;
  // ancestor(node, depth) for every node, in one preorder pass.
  std::vector<int> ancestors_at(int depth) const;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<int> leaf_of_point_;
  int max_depth_;
  std::size_t n_features_;
};

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
  std::size_t n_left = 0;

  bool valid() const noexcept { return feature >= 0; }
};

// Greedy variance-reduction split over the given rows and candidate features:
// each feature is sorted once and scanned with prefix sums. Both sides must
// hold at least min_leaf rows. Ties keep the first candidate found (feature
// order as given, then ascending threshold).
SplitCandidate best_split(const RowMatrix& x, const Vector& y, std::span<const std::uint32_t> rows,
                          std::span<const int> features, int min_leaf);

TreeModel train_rf_tree(const RowMatrix& x, const Vector& y, SamplerSeed seed,
                        const TreeConfig& config = {});

struct RfPartition {
  Partition partition;
  int depth = 0;
};

// Partition of the training points by their ancestor at the given depth,
// relabelled by first appearance.
Partition rf_partition_at_depth(const TreeModel& tree, int depth);
// Samples depth ~ DiscreteUniform(0, max_depth) from seed.
RfPartition rf_partition(const TreeModel& tree, SamplerSeed seed);
int sample_depth(const TreeModel& tree, std::mt19937_64& rng);

// Label of each depth-d ancestor node in the training partition's label
// space, kNoCluster for nodes no training point reaches.
std::vector<std::int32_t> node_labels_at_depth(const TreeModel& tree, int depth);

// Routes test rows through the tree and returns labels in the label space of
// rf_partition_at_depth(tree, depth).
std::vector<std::int32_t> rf_extend(const TreeModel& tree, const RowMatrix& x_test, int depth);

}  // namespace rpk
