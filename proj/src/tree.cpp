#include "rpk/tree.hpp"

#include "rpk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rpk {

int TreeConfig::resolved_mtry(std::size_t d) const {
  if (mtry > 0) return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(mtry), d));
  return static_cast<int>(std::max<std::size_t>(1, (d + 2) / 3));
}

int TreeConfig::resolved_max_depth(std::size_t n) const {
  if (max_depth > 0) return max_depth;
  int h = 0;
  while ((std::size_t{1} << h) < n) ++h;
  return std::max(h, 1);
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, std::vector<int> leaf_of_point, int max_depth,
                     std::size_t n_features)
    : nodes_(std::move(nodes)),
      leaf_of_point_(std::move(leaf_of_point)),
      max_depth_(max_depth),
      n_features_(n_features) {
  if (nodes_.empty()) throw DataError("tree needs at least a root node");
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    if (nd.parent < 0 || static_cast<std::size_t>(nd.parent) >= i)
      throw DataError("tree nodes must be stored parent-first");
    if (nd.depth != nodes_[static_cast<std::size_t>(nd.parent)].depth + 1)
      throw DataError("tree node depth inconsistent with parent");
  }
  for (int leaf : leaf_of_point_)
    if (leaf < 0 || static_cast<std::size_t>(leaf) >= nodes_.size() ||
        !nodes_[static_cast<std::size_t>(leaf)].is_leaf())
      throw DataError("tree leaf assignment points at a non-leaf");
}

std::size_t TreeModel::n_leaves() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::route(std::span<const double> row) const {
  if (row.size() != n_features_)
    throw DimensionError("tree routing: row has " + std::to_string(row.size()) +
                         " features, tree expects " + std::to_string(n_features_));
  int node = 0;
  while (!nodes_[static_cast<std::size_t>(node)].is_leaf()) {
    const auto& nd = nodes_[static_cast<std::size_t>(node)];
    node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
  }
  return node;
}

int TreeModel::ancestor(int node, int depth) const {
  while (nodes_[static_cast<std::size_t>(node)].depth > depth)
    node = nodes_[static_cast<std::size_t>(node)].parent;
  return node;
}

std::vector<int> TreeModel::ancestors_at(int depth) const {
  std::vector<int> anc(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& nd = nodes_[i];
    anc[i] = nd.depth <= depth ? static_cast<int>(i) : anc[static_cast<std::size_t>(nd.parent)];
  }
  return anc;
}

SplitCandidate best_split(const RowMatrix& x, const Vector& y, std::span<const std::uint32_t> rows,
                          std::span<const int> features, int min_leaf) {
  SplitCandidate best;
  const std::size_t n = rows.size();
  const std::size_t leaf = static_cast<std::size_t>(std::max(min_leaf, 1));
  if (n < 2 * leaf) return best;

  // Center targets at the node mean; gain = S_L^2/n_L + S_R^2/n_R - S^2/n.
  double mean = 0.0;
  for (auto r : rows) mean += y[r];
  mean /= static_cast<double>(n);
  double sse = 0.0;
  for (auto r : rows) sse += (y[r] - mean) * (y[r] - mean);
  if (!(sse > 0.0)) return best;
  double total = 0.0;
  for (auto r : rows) total += y[r] - mean;
  const double base = total * total / static_cast<double>(n);
  // Gains below this are rounding noise, not structure.
  const double min_gain = 1e-12 * sse;

  std::vector<std::uint32_t> order(rows.begin(), rows.end());
  for (int f : features) {
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x(a, f) < x(b, f); });
    double left_sum = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      left_sum += y[order[i]] - mean;
      const std::size_t n_left = i + 1;
      const double lo = x(order[i], f);
      const double hi = x(order[i + 1], f);
      if (!(lo < hi)) continue;
      if (n_left < leaf || n - n_left < leaf) continue;
      const double right_sum = total - left_sum;
      const double gain = left_sum * left_sum / static_cast<double>(n_left) +
                          right_sum * right_sum / static_cast<double>(n - n_left) - base;
      if (gain > min_gain && gain > best.gain) {
        double t = lo + (hi - lo) / 2.0;
        if (!(t < hi)) t = lo;
        best = {f, t, gain, n_left};
      }
    }
  }
  return best;
}

namespace {

struct Builder {
  const RowMatrix& x;
  const Vector& y;
  const TreeConfig& cfg;
  int mtry;
  int max_depth;
  std::mt19937_64& rng;
  std::vector<TreeNode> nodes;
  std::vector<int> all_features;

  int grow(std::vector<std::uint32_t>& rows, int parent, int depth) {
    const int id = static_cast<int>(nodes.size());
    TreeNode node;
    node.parent = parent;
    node.depth = depth;
    node.n_samples = static_cast<std::uint32_t>(rows.size());
    nodes.push_back(node);
    if (depth >= max_depth) return id;

    // Partial Fisher-Yates: the first mtry entries are a uniform
    // without-replacement sample of the features.
    for (int i = 0; i < mtry; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(all_features.size()) - 1);
      std::swap(all_features[static_cast<std::size_t>(i)],
                all_features[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> features(all_features.begin(), all_features.begin() + mtry);
    const SplitCandidate split = best_split(x, y, rows, features, cfg.min_leaf);
    if (!split.valid()) return id;

    std::vector<std::uint32_t> left_rows;
    std::vector<std::uint32_t> right_rows;
    left_rows.reserve(split.n_left);
    right_rows.reserve(rows.size() - split.n_left);
    for (auto r : rows) (x(r, split.feature) <= split.threshold ? left_rows : right_rows).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    nodes[static_cast<std::size_t>(id)].feature = split.feature;
    nodes[static_cast<std::size_t>(id)].threshold = split.threshold;
    nodes[static_cast<std::size_t>(id)].gain = split.gain;
    const int l = grow(left_rows, id, depth + 1);
    nodes[static_cast<std::size_t>(id)].left = l;
    const int r = grow(right_rows, id, depth + 1);
    nodes[static_cast<std::size_t>(id)].right = r;
    return id;
  }
};

}  // namespace

TreeModel train_rf_tree(const RowMatrix& x, const Vector& y, SamplerSeed seed,
                        const TreeConfig& config) {
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (n < 2) throw ParameterError("train_rf_tree: need at least 2 rows");
  if (d < 1) throw ParameterError("train_rf_tree: need at least 1 feature");
  if (static_cast<std::size_t>(y.size()) != n)
    throw DimensionError("train_rf_tree: target length does not match rows");
  if (!x.allFinite() || !y.allFinite()) throw DataError("train_rf_tree: non-finite input");
  if (config.min_leaf < 1) throw ParameterError("train_rf_tree: min_leaf must be >= 1");

  std::mt19937_64 rng = seed.engine();
  std::vector<std::uint32_t> rows(n);
  if (config.bootstrap) {
    std::uniform_int_distribution<std::uint32_t> pick(0, static_cast<std::uint32_t>(n - 1));
    for (auto& r : rows) r = pick(rng);
  } else {
    std::iota(rows.begin(), rows.end(), 0U);
  }

  Builder b{x, y, config, config.resolved_mtry(d), config.resolved_max_depth(n), rng, {}, {}};
  b.all_features.resize(d);
  std::iota(b.all_features.begin(), b.all_features.end(), 0);
  b.grow(rows, -1, 0);

  // Every original point gets a leaf, bootstrap or not.
  std::vector<int> leaf_of_point(n);
  TreeModel routing(b.nodes, std::vector<int>{}, b.max_depth, d);
  for (std::size_t i = 0; i < n; ++i)
    leaf_of_point[i] = routing.route({x.row(static_cast<Eigen::Index>(i)).data(), d});
  return TreeModel(std::move(b.nodes), std::move(leaf_of_point), b.max_depth, d);
}

std::vector<std::int32_t> node_labels_at_depth(const TreeModel& tree, int depth) {
  const auto anc = tree.ancestors_at(depth);
  std::vector<std::int32_t> labels(tree.nodes().size(), kNoCluster);
  std::int32_t next = 0;
  for (int leaf : tree.leaf_of_point()) {
    auto& l = labels[static_cast<std::size_t>(anc[static_cast<std::size_t>(leaf)])];
    if (l == kNoCluster) l = next++;
  }
  return labels;
}

Partition rf_partition_at_depth(const TreeModel& tree, int depth) {
  if (depth < 0) throw ParameterError("rf_partition: depth must be non-negative");
  const auto anc = tree.ancestors_at(depth);
  const auto labels = node_labels_at_depth(tree, depth);
  std::vector<Label> assignment(tree.n_points());
  for (std::size_t i = 0; i < assignment.size(); ++i)
    assignment[i] = static_cast<Label>(
        labels[static_cast<std::size_t>(anc[static_cast<std::size_t>(tree.leaf_of_point()[i])])]);
  return Partition(std::move(assignment));
}

int sample_depth(const TreeModel& tree, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> depth(0, tree.max_depth());
  return depth(rng);
}

RfPartition rf_partition(const TreeModel& tree, SamplerSeed seed) {
  auto rng = seed.engine();
  const int d = sample_depth(tree, rng);
  return {rf_partition_at_depth(tree, d), d};
}

std::vector<std::int32_t> rf_extend(const TreeModel& tree, const RowMatrix& x_test, int depth) {
  if (static_cast<std::size_t>(x_test.cols()) != tree.n_features())
    throw DataError("rf_extend: test rows have " + std::to_string(x_test.cols()) +
                    " features, tree expects " + std::to_string(tree.n_features()));
  const auto anc = tree.ancestors_at(depth);
  const auto labels = node_labels_at_depth(tree, depth);
  const auto d = static_cast<std::size_t>(x_test.cols());
  std::vector<std::int32_t> out(static_cast<std::size_t>(x_test.rows()));
  for (Eigen::Index t = 0; t < x_test.rows(); ++t) {
    const int leaf = tree.route({x_test.row(t).data(), d});
    out[static_cast<std::size_t>(t)] =
        labels[static_cast<std::size_t>(anc[static_cast<std::size_t>(leaf)])];
  }
  return out;
}

}  // namespace rpk
