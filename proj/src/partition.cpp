#include "rpk/partition.hpp"

#include "rpk/errors.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace rpk {

Partition::Partition(std::vector<Label> assignments) : assignments_(std::move(assignments)) {
  build_index();
}

Partition Partition::from_labels(std::span<const std::int64_t> raw) {
  std::unordered_map<std::int64_t, Label> relabel;
  relabel.reserve(raw.size());
  std::vector<Label> labels(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto [it, inserted] = relabel.try_emplace(raw[i], static_cast<Label>(relabel.size()));
    labels[i] = it->second;
  }
  return Partition(std::move(labels));
}

Partition Partition::single_cluster(std::size_t n) { return Partition(std::vector<Label>(n, 0)); }

Partition Partition::singletons(std::size_t n) {
  std::vector<Label> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<Label>(i);
  return Partition(std::move(labels));
}

void Partition::build_index() {
  if (assignments_.size() > std::numeric_limits<std::uint32_t>::max())
    throw ResourceError("partition too large for 32-bit indices");
  std::size_t k = 0;
  for (Label l : assignments_) k = std::max<std::size_t>(k, std::size_t{l} + 1);
  offsets_.assign(k + 1, 0);
  for (Label l : assignments_) ++offsets_[l + 1];
  for (std::size_t c = 0; c < k; ++c) {
    if (offsets_[c + 1] == 0)
      throw DataError("partition labels are not contiguous: label " + std::to_string(c) +
                      " is unused");
    offsets_[c + 1] += offsets_[c];
  }
  members_.resize(assignments_.size());
  std::vector<std::uint32_t> cursor(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < assignments_.size(); ++i)
    members_[cursor[assignments_[i]]++] = static_cast<std::uint32_t>(i);
}

bool Partition::refines(const Partition& coarser) const {
  if (coarser.size() != size()) return false;
  for (Label c = 0; c < n_clusters(); ++c) {
    auto m = members(c);
    const Label target = coarser.label(m.front());
    for (auto i : m)
      if (coarser.label(i) != target) return false;
  }
  return true;
}

PartitionEnsemble::PartitionEnsemble(std::vector<Partition> partitions)
    : partitions_(std::move(partitions)) {
  if (partitions_.empty()) throw ParameterError("ensemble needs at least one partition");
  n_ = partitions_.front().size();
  for (const auto& p : partitions_)
    if (p.size() != n_) throw DimensionError("ensemble partitions disagree on point count");
}

namespace detail {

void partition_matvec_into(const Partition& p, const double* v, double* out,
                           std::vector<double>& cluster_buf) {
  const auto labels = p.assignments();
  const std::size_t n = labels.size();
  cluster_buf.assign(p.n_clusters(), 0.0);
  for (std::size_t i = 0; i < n; ++i) cluster_buf[labels[i]] += v[i];
  for (std::size_t i = 0; i < n; ++i) out[i] = cluster_buf[labels[i]];
}

void partition_block_solve_into(const Partition& p, double sigma, const double* v, double* out,
                                std::vector<double>& cluster_buf) {
  const auto labels = p.assignments();
  const std::size_t n = labels.size();
  const std::size_t k = p.n_clusters();
  cluster_buf.assign(k, 0.0);
  for (std::size_t i = 0; i < n; ++i) cluster_buf[labels[i]] += v[i];
  for (Label c = 0; c < k; ++c) cluster_buf[c] /= (p.cluster_size(c) + sigma);
  const double inv_sigma = 1.0 / sigma;
  for (std::size_t i = 0; i < n; ++i) out[i] = inv_sigma * (v[i] - cluster_buf[labels[i]]);
}

}  // namespace detail

Vector partition_matvec(const Partition& p, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != p.size())
    throw DimensionError("partition_matvec: vector length " + std::to_string(v.size()) +
                         " != partition size " + std::to_string(p.size()));
  Vector out(v.size());
  std::vector<double> buf;
  detail::partition_matvec_into(p, v.data(), out.data(), buf);
  return out;
}

Vector partition_block_solve(const Partition& p, double sigma, const Vector& v) {
  if (!(sigma > 0.0)) throw ParameterError("partition_block_solve: sigma must be positive");
  if (static_cast<std::size_t>(v.size()) != p.size())
    throw DimensionError("partition_block_solve: vector length mismatch");
  Vector out(v.size());
  std::vector<double> buf;
  detail::partition_block_solve_into(p, sigma, v.data(), out.data(), buf);
  return out;
}

// ---- serialization ----

namespace {

constexpr std::array<char, 4> kMagic{'R', 'P', 'K', 'E'};

template <typename T>
void put(std::ostream& out, T value) {
  static_assert(std::is_unsigned_v<T>);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t b = 0; b < sizeof(T); ++b) bytes[b] = static_cast<char>((value >> (8 * b)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename T>
T get(std::istream& in) {
  static_assert(std::is_unsigned_v<T>);
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw DataError("ensemble file truncated");
  T value = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) value |= static_cast<T>(bytes[b]) << (8 * b);
  return value;
}

}  // namespace

void write_ensemble(std::ostream& out, const PartitionEnsemble& ensemble,
                    const std::string& provenance) {
  out.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(out, kEnsembleFormatVersion);
  put<std::uint64_t>(out, ensemble.m());
  put<std::uint64_t>(out, ensemble.n());
  put<std::uint64_t>(out, provenance.size());
  out.write(provenance.data(), static_cast<std::streamsize>(provenance.size()));
  for (const auto& p : ensemble) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(p.n_clusters()));
    for (Label l : p.assignments()) put<std::uint32_t>(out, l);
  }
  if (!out) throw ResourceError("failed writing ensemble");
}

EnsembleFile read_ensemble(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw DataError("not an ensemble file (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kEnsembleFormatVersion)
    throw DataError("unsupported ensemble format version " + std::to_string(version));
  const auto m = get<std::uint64_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto prov_len = get<std::uint64_t>(in);
  if (prov_len > (std::uint64_t{1} << 30)) throw DataError("ensemble provenance block too large");
  std::string provenance(prov_len, '\0');
  in.read(provenance.data(), static_cast<std::streamsize>(prov_len));
  if (!in) throw DataError("ensemble file truncated");
  std::vector<Partition> partitions;
  partitions.reserve(m);
  for (std::uint64_t s = 0; s < m; ++s) {
    const auto k = get<std::uint32_t>(in);
    std::vector<Label> labels(n);
    for (auto& l : labels) l = get<std::uint32_t>(in);
    Partition p(std::move(labels));
    if (p.n_clusters() != k) throw DataError("ensemble file: cluster count mismatch");
    partitions.push_back(std::move(p));
  }
  return {PartitionEnsemble(std::move(partitions)), std::move(provenance)};
}

}  // namespace rpk
