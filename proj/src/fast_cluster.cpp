#include "rpk/fast_cluster.hpp"

#include "rpk/errors.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

namespace rpk {

void FastClusterConfig::validate() const {
  if (!(dim_keep_prob > 0.0 && dim_keep_prob <= 1.0))
    throw ParameterError("fast cluster: dim_keep_prob must lie in (0, 1]");
}

int FastClusterConfig::resolved_h(std::size_t n) const {
  if (h >= 0) return h;
  int e = 0;
  while ((std::size_t{1} << e) < n) ++e;
  return e;
}

namespace {

constexpr std::size_t kLeafSize = 8;
constexpr std::size_t kBruteForceCenters = 32;

double masked_sq_dist(const double* center, const double* row, const std::vector<int>& dims) {
  double s = 0.0;
  for (std::size_t k = 0; k < dims.size(); ++k) {
    const double diff = center[k] - row[dims[k]];
    s += diff * diff;
  }
  return s;
}

struct Best {
  double dist = std::numeric_limits<double>::infinity();
  std::uint32_t index = std::numeric_limits<std::uint32_t>::max();

  void offer(double d, std::uint32_t i) {
    if (d < dist || (d == dist && i < index)) {
      dist = d;
      index = i;
    }
  }
};

// Static kd-tree over the masked center coordinates.
class CenterTree {
 public:
  explicit CenterTree(const CenterSet& c) : c_(c) {
    order_.resize(static_cast<std::size_t>(c.coords.rows()));
    std::iota(order_.begin(), order_.end(), 0U);
    build(0, order_.size());
  }

  std::uint32_t query(const double* row) const {
    Best best;
    if (!nodes_.empty()) search(0, row, best);
    return best.index;
  }

 private:
  struct Node {
    std::size_t begin, end;
    int dim = -1;  // index into c_.dims; -1 for leaves
    double split = 0.0;
    int left = -1, right = -1;
  };

  int build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end});
    if (end - begin <= kLeafSize) return id;
    const auto kd = static_cast<Eigen::Index>(c_.dims.size());
    int best_dim = 0;
    double best_spread = -1.0;
    for (Eigen::Index k = 0; k < kd; ++k) {
      double lo = std::numeric_limits<double>::infinity();
      double hi = -lo;
      for (std::size_t i = begin; i < end; ++i) {
        const double v = c_.coords(order_[i], k);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      if (hi - lo > best_spread) {
        best_spread = hi - lo;
        best_dim = static_cast<int>(k);
      }
    }
    if (!(best_spread > 0.0)) return id;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(begin),
                     order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::uint32_t a, std::uint32_t b) {
                       return c_.coords(a, best_dim) < c_.coords(b, best_dim);
                     });
    const double split = c_.coords(order_[mid], best_dim);
    nodes_[static_cast<std::size_t>(id)].dim = best_dim;
    nodes_[static_cast<std::size_t>(id)].split = split;
    const int l = build(begin, mid);
    const int r = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].left = l;
    nodes_[static_cast<std::size_t>(id)].right = r;
    return id;
  }

  void search(int id, const double* row, Best& best) const {
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    if (nd.dim < 0) {
      for (std::size_t i = nd.begin; i < nd.end; ++i) {
        const std::uint32_t c = order_[i];
        best.offer(masked_sq_dist(c_.coords.row(c).data(), row, c_.dims), c);
      }
      return;
    }
    // Left holds coords <= split, right holds coords >= split.
    const double q = row[c_.dims[static_cast<std::size_t>(nd.dim)]];
    const double diff = q - nd.split;
    const int near = diff <= 0.0 ? nd.left : nd.right;
    const int far = diff <= 0.0 ? nd.right : nd.left;
    search(near, row, best);
    // Any center across the plane is at least diff^2 away; equality must
    // still be visited because a lower index could tie.
    if (diff * diff <= best.dist) search(far, row, best);
  }

  const CenterSet& c_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace

std::vector<std::uint32_t> nearest_centers(const CenterSet& centers, const RowMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != centers.n_features)
    throw DataError("fast cluster: rows have " + std::to_string(x.cols()) +
                    " features, centers were built on " + std::to_string(centers.n_features));
  const auto n_centers = static_cast<std::uint32_t>(centers.coords.rows());
  if (n_centers == 0) throw DataError("fast cluster: empty center set");
  std::vector<std::uint32_t> out(static_cast<std::size_t>(x.rows()));
  if (n_centers <= kBruteForceCenters) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Best best;
      for (std::uint32_t c = 0; c < n_centers; ++c)
        best.offer(masked_sq_dist(centers.coords.row(c).data(), x.row(i).data(), centers.dims), c);
      out[static_cast<std::size_t>(i)] = best.index;
    }
    return out;
  }
  const CenterTree tree(centers);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    out[static_cast<std::size_t>(i)] = tree.query(x.row(i).data());
  return out;
}

FastClusterResult fast_cluster_assign(const RowMatrix& x, std::vector<int> dims,
                                      std::vector<std::uint32_t> center_rows) {
  if (dims.empty()) throw ParameterError("fast cluster: dimension mask keeps no dimension");
  if (center_rows.empty()) throw ParameterError("fast cluster: need at least one center");
  std::sort(dims.begin(), dims.end());
  std::sort(center_rows.begin(), center_rows.end());
  for (int d : dims)
    if (d < 0 || d >= x.cols()) throw DimensionError("fast cluster: mask dimension out of range");
  for (auto r : center_rows)
    if (r >= x.rows()) throw DimensionError("fast cluster: center row out of range");

  FastClusterResult res;
  CenterSet& cs = res.centers;
  cs.n_features = static_cast<std::size_t>(x.cols());
  cs.dims = std::move(dims);
  cs.center_rows = std::move(center_rows);
  cs.coords.resize(static_cast<Eigen::Index>(cs.center_rows.size()),
                   static_cast<Eigen::Index>(cs.dims.size()));
  for (std::size_t c = 0; c < cs.center_rows.size(); ++c)
    for (std::size_t k = 0; k < cs.dims.size(); ++k)
      cs.coords(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(k)) = x(cs.center_rows[c], cs.dims[k]);

  const auto nearest = nearest_centers(cs, x);
  cs.center_label.assign(cs.center_rows.size(), kNoCluster);
  std::vector<Label> assignment(nearest.size());
  std::int32_t next = 0;
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    auto& l = cs.center_label[nearest[i]];
    if (l == kNoCluster) l = next++;
    assignment[i] = static_cast<Label>(l);
  }
  res.partition = Partition(std::move(assignment));
  int s = 0;
  while ((std::size_t{1} << s) < cs.center_rows.size()) ++s;
  res.exponent = s;
  return res;
}

FastClusterResult fast_cluster_partition(const RowMatrix& x, const FastClusterConfig& config,
                                         SamplerSeed seed) {
  config.validate();
  const auto n = static_cast<std::size_t>(x.rows());
  const auto d = static_cast<std::size_t>(x.cols());
  if (n < 1) throw ParameterError("fast cluster: need at least one row");
  if (d < 1) throw ParameterError("fast cluster: need at least one feature");
  if (!x.allFinite()) throw DataError("fast cluster: non-finite input");

  auto rng = seed.engine();
  std::bernoulli_distribution keep(config.dim_keep_prob);
  std::vector<int> dims;
  while (dims.empty()) {
    for (std::size_t k = 0; k < d; ++k)
      if (keep(rng)) dims.push_back(static_cast<int>(k));
  }
  const int h = config.resolved_h(n);
  std::uniform_int_distribution<int> exponent(0, h);
  const int s = exponent(rng);
  const std::size_t want = s >= 63 ? n : std::min<std::size_t>(n, std::size_t{1} << s);

  std::vector<std::uint32_t> all(n);
  std::iota(all.begin(), all.end(), 0U);
  std::vector<std::uint32_t> centers;
  centers.reserve(want);
  std::sample(all.begin(), all.end(), std::back_inserter(centers), want, rng);

  auto res = fast_cluster_assign(x, std::move(dims), std::move(centers));
  res.exponent = s;
  return res;
}

std::vector<std::int32_t> fast_cluster_extend(const CenterSet& centers, const RowMatrix& x_test) {
  const auto nearest = nearest_centers(centers, x_test);
  std::vector<std::int32_t> out(nearest.size());
  for (std::size_t i = 0; i < nearest.size(); ++i) out[i] = centers.center_label[nearest[i]];
  return out;
}

}  // namespace rpk
