#include "rpk/dataset.hpp"

#include "rpk/errors.hpp"
#include "rpk/seed.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace rpk {

void Standardization::apply(RowMatrix& x) const {
  if (empty()) return;
  if (x.cols() != mean.size()) throw DimensionError("standardization: column count mismatch");
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    x.col(j) = (x.col(j).array() - mean[j]) / scale(j);
}

Standardization compute_standardization(const RowMatrix& x) {
  Standardization s;
  const auto n = x.rows();
  s.mean = Eigen::RowVectorXd::Zero(x.cols());
  s.std = Eigen::RowVectorXd::Zero(x.cols());
  if (n == 0) return s;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double mu = x.col(j).mean();
    const double var = (x.col(j).array() - mu).square().mean();
    s.mean[j] = mu;
    // Treat relative variation at rounding level as constant.
    s.std[j] = var > 1e-24 * (1.0 + mu * mu) ? std::sqrt(var) : 0.0;
  }
  return s;
}

const Vector& Dataset::target() const {
  if (!y) throw DataError("dataset '" + name + "' has no target");
  return *y;
}

SamplerInput Dataset::sampler_input() const {
  return {&x, y ? &*y : nullptr, &categorical};
}

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
  Dataset d;
  d.name = name;
  d.feature_names = feature_names;
  d.target_name = target_name;
  d.categorical_info = categorical_info;
  d.standardization = standardization;
  d.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
  if (y) d.y = Vector(static_cast<Eigen::Index>(rows.size()));
  d.categorical.assign(categorical.size(), CategoricalColumn(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(rows[i]);
    if (rows[i] >= this->rows()) throw DimensionError("dataset subset: row out of range");
    d.x.row(static_cast<Eigen::Index>(i)) = x.row(r);
    if (y) (*d.y)[static_cast<Eigen::Index>(i)] = (*y)[r];
    for (std::size_t c = 0; c < categorical.size(); ++c) d.categorical[c][i] = categorical[c][rows[i]];
  }
  return d;
}

std::string IngestReport::to_text() const {
  std::ostringstream os;
  os << "rows_read: " << rows_read << "\nrows_kept: " << rows_kept
     << "\nrows_dropped_missing: " << rows_dropped << "\n";
  for (const auto& issue : issues)
    os << "line " << issue.line << " [" << issue.column << "]: " << issue.message << "\n";
  return os.str();
}

namespace {

std::vector<std::string> split_record(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delim) {
      out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

LoadResult parse_csv(std::istream& in, const CsvOptions& options) {
  LoadResult result;
  IngestReport& report = result.report;
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw DataError("csv: empty file (no header)");
  std::vector<std::string> header = split_record(line, options.delimiter);
  for (auto& h : header) h = trim(h);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::size_t> line_numbers;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto rec = split_record(line, options.delimiter);
    ++report.rows_read;
    if (rec.size() != header.size()) {
      report.issues.push_back({line_no, "*",
                               "expected " + std::to_string(header.size()) + " fields, found " +
                                   std::to_string(rec.size())});
      continue;
    }
    for (auto& c : rec) c = trim(c);
    cells.push_back(std::move(rec));
    line_numbers.push_back(line_no);
  }
  if (cells.empty()) throw DataError("csv: no data rows");
  if (!report.issues.empty()) {
    std::string msg = "csv: malformed rows\n";
    for (const auto& i : report.issues) msg += "  line " + std::to_string(i.line) + ": " + i.message + "\n";
    throw DataError(msg);
  }

  const std::size_t ncol = header.size();
  auto is_missing = [&](const std::string& s) { return contains(options.missing_tokens, s); };

  int target_col = -1;
  if (!options.target.empty()) {
    const auto it = std::find(header.begin(), header.end(), options.target);
    if (it == header.end()) throw DataError("csv: target column '" + options.target + "' not found");
    target_col = static_cast<int>(it - header.begin());
  }

  enum class Role { Numeric, Categorical, Ignored };
  std::vector<Role> roles(ncol, Role::Numeric);
  for (std::size_t c = 0; c < ncol; ++c) {
    if (contains(options.ignore, header[c])) {
      roles[c] = Role::Ignored;
      continue;
    }
    if (contains(options.categorical, header[c])) {
      roles[c] = Role::Categorical;
      continue;
    }
    if (contains(options.numeric, header[c]) || static_cast<int>(c) == target_col) continue;
    for (const auto& rec : cells)
      if (!is_missing(rec[c]) && !parse_number(rec[c])) {
        roles[c] = Role::Categorical;
        break;
      }
  }

  // Unparseable cells in numeric columns (forced or the target).
  for (std::size_t r = 0; r < cells.size(); ++r)
    for (std::size_t c = 0; c < ncol; ++c)
      if (roles[c] == Role::Numeric && !is_missing(cells[r][c]) && !parse_number(cells[r][c]))
        report.issues.push_back({line_numbers[r], header[c], "cannot parse '" + cells[r][c] + "' as a number"});
  if (!report.issues.empty()) {
    std::string msg = "csv: unparseable numeric cells\n";
    for (const auto& i : report.issues)
      msg += "  line " + std::to_string(i.line) + " [" + i.column + "]: " + i.message + "\n";
    throw DataError(msg);
  }

  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    bool ok = true;
    for (std::size_t c = 0; c < ncol && ok; ++c)
      if (roles[c] != Role::Ignored && is_missing(cells[r][c])) ok = false;
    if (ok)
      keep.push_back(r);
    else
      ++report.rows_dropped;
  }
  report.rows_kept = keep.size();
  if (keep.empty()) throw DataError("csv: every row has a missing value");

  Dataset& d = result.dataset;
  d.name = options.name;
  std::vector<std::size_t> feature_cols;
  std::vector<std::size_t> cat_cols;
  for (std::size_t c = 0; c < ncol; ++c) {
    if (static_cast<int>(c) == target_col || roles[c] == Role::Ignored) continue;
    (roles[c] == Role::Numeric ? feature_cols : cat_cols).push_back(c);
    if (roles[c] == Role::Numeric && contains(options.also_categorical, header[c])) cat_cols.push_back(c);
  }
  d.x.resize(static_cast<Eigen::Index>(keep.size()), static_cast<Eigen::Index>(feature_cols.size()));
  for (auto c : feature_cols) d.feature_names.push_back(header[c]);
  for (std::size_t i = 0; i < keep.size(); ++i)
    for (std::size_t j = 0; j < feature_cols.size(); ++j)
      d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = *parse_number(cells[keep[i]][feature_cols[j]]);
  if (target_col >= 0) {
    if (roles[static_cast<std::size_t>(target_col)] != Role::Numeric)
      throw DataError("csv: target column must be numeric");
    d.target_name = header[static_cast<std::size_t>(target_col)];
    Vector y(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i)
      y[static_cast<Eigen::Index>(i)] = *parse_number(cells[keep[i]][static_cast<std::size_t>(target_col)]);
    d.y = std::move(y);
  }
  for (auto c : cat_cols) {
    CategoricalInfo info{header[c], {}};
    std::unordered_map<std::string, std::int32_t> codes;
    CategoricalColumn col(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto& s = cells[keep[i]][c];
      auto [it, inserted] = codes.try_emplace(s, static_cast<std::int32_t>(codes.size()));
      if (inserted) info.categories.push_back(s);
      col[i] = it->second;
    }
    d.categorical.push_back(std::move(col));
    d.categorical_info.push_back(std::move(info));
  }
  return result;
}

LoadResult load_csv(const std::filesystem::path& path, CsvOptions options) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  if (options.name.empty()) options.name = path.stem().string();
  return parse_csv(in, options);
}

SplitResult split(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw ParameterError("split: train fraction must lie in (0, 1)");
  const std::size_t n = dataset.rows();
  if (n < 2) throw DataError("split: need at least 2 rows");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(splitmix64(spec.seed ^ 0x53504C4954ULL));
  // Explicit Fisher-Yates so the permutation is fixed by the seed alone.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(order[i], order[j]);
  }
  auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

  SplitResult out;
  out.train_rows.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  out.test_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(out.train_rows.begin(), out.train_rows.end());
  std::sort(out.test_rows.begin(), out.test_rows.end());

  // Standardize relative to the raw features.
  Dataset raw = dataset;
  if (!raw.standardization.empty())
    throw ParameterError("split: dataset is already standardized");
  out.train = raw.subset(out.train_rows);
  out.test = raw.subset(out.test_rows);
  const auto stats = compute_standardization(out.train.x);
  stats.apply(out.train.x);
  stats.apply(out.test.x);
  out.train.standardization = stats;
  out.test.standardization = stats;
  return out;
}

double PiecewiseTruth::operator()(double x) const {
  std::size_t seg = 0;
  while (seg < breaks.size() && x >= breaks[seg]) ++seg;
  return levels[seg];
}

Dataset synth_piecewise(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 10) throw ParameterError("synth_piecewise: need N >= 10");
  if (!(noise >= 0.0)) throw ParameterError("synth_piecewise: noise must be non-negative");
  auto rng = SamplerSeed{seed, 0}.engine();
  std::uniform_real_distribution<double> u(0.0, 10.0);
  std::normal_distribution<double> eps(0.0, 1.0);
  const PiecewiseTruth truth;
  Dataset d;
  d.name = "piecewise";
  d.feature_names = {"x"};
  d.target_name = "y";
  d.x.resize(static_cast<Eigen::Index>(n), 1);
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng);
    d.x(static_cast<Eigen::Index>(i), 0) = x;
    const double e = eps(rng);
    y[static_cast<Eigen::Index>(i)] = truth(x) + noise * e;
  }
  d.y = std::move(y);
  return d;
}

Dataset synth_scaling(std::size_t n, std::size_t d, std::uint64_t seed) {
  if (n < 1 || d < 1) throw ParameterError("synth_scaling: need N, D >= 1");
  auto rng = SamplerSeed{seed, 1}.engine();
  std::normal_distribution<double> g(0.0, 1.0);
  constexpr int kBlobs = 8;
  RowMatrix centers(kBlobs, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = 3.0 * g(rng);
  std::uniform_int_distribution<int> blob(0, kBlobs - 1);
  Dataset out;
  out.name = "scaling";
  out.x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Vector y(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const int b = blob(rng);
    for (std::size_t j = 0; j < d; ++j)
      out.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          centers(b, static_cast<Eigen::Index>(j)) + g(rng);
    y[static_cast<Eigen::Index>(i)] = std::sin(out.x(static_cast<Eigen::Index>(i), 0)) + 0.1 * g(rng);
  }
  for (std::size_t j = 0; j < d; ++j) out.feature_names.push_back("x" + std::to_string(j));
  out.target_name = "y";
  out.y = std::move(y);
  return out;
}

// ---- binary dataset format ----

namespace {

constexpr std::array<char, 4> kDatasetMagic{'R', 'P', 'K', 'D'};
constexpr std::uint32_t kDatasetVersion = 1;

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> b{};
  for (int i = 0; i < 8; ++i) b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(b.data(), 8);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b{};
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw DataError("dataset file truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t{b[static_cast<std::size_t>(i)]} << (8 * i);
  return v;
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }
double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

void put_str(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_str(std::istream& in) {
  const auto len = get_u64(in);
  if (len > (std::uint64_t{1} << 28)) throw DataError("dataset file: string too long");
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("dataset file truncated");
  return s;
}

void put_row(std::ostream& out, const Eigen::RowVectorXd& v) {
  put_u64(out, static_cast<std::uint64_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

Eigen::RowVectorXd get_row(std::istream& in) {
  const auto n = get_u64(in);
  Eigen::RowVectorXd v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = get_f64(in);
  return v;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& d) {
  out.write(kDatasetMagic.data(), 4);
  put_u64(out, kDatasetVersion);
  put_str(out, d.name);
  put_str(out, d.target_name);
  put_u64(out, d.rows());
  put_u64(out, d.cols());
  for (const auto& f : d.feature_names) put_str(out, f);
  for (Eigen::Index i = 0; i < d.x.size(); ++i) put_f64(out, d.x.data()[i]);
  put_u64(out, d.y ? 1 : 0);
  if (d.y)
    for (Eigen::Index i = 0; i < d.y->size(); ++i) put_f64(out, (*d.y)[i]);
  put_u64(out, d.categorical.size());
  for (std::size_t c = 0; c < d.categorical.size(); ++c) {
    put_str(out, d.categorical_info.size() > c ? d.categorical_info[c].name : std::string{});
    const auto& cats = d.categorical_info.size() > c ? d.categorical_info[c].categories
                                                      : std::vector<std::string>{};
    put_u64(out, cats.size());
    for (const auto& s : cats) put_str(out, s);
    for (auto code : d.categorical[c]) put_u64(out, static_cast<std::uint64_t>(static_cast<std::uint32_t>(code)));
  }
  put_row(out, d.standardization.mean);
  put_row(out, d.standardization.std);
  if (!out) throw ResourceError("failed writing dataset");
}

Dataset read_dataset(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), 4);
  if (!in || magic != kDatasetMagic) throw DataError("not a dataset file (bad magic)");
  const auto version = get_u64(in);
  if (version != kDatasetVersion)
    throw DataError("unsupported dataset format version " + std::to_string(version));
  Dataset d;
  d.name = get_str(in);
  d.target_name = get_str(in);
  const auto rows = get_u64(in);
  const auto cols = get_u64(in);
  d.feature_names.resize(cols);
  for (auto& f : d.feature_names) f = get_str(in);
  d.x.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < d.x.size(); ++i) d.x.data()[i] = get_f64(in);
  if (get_u64(in) == 1) {
    Vector y(static_cast<Eigen::Index>(rows));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = get_f64(in);
    d.y = std::move(y);
  }
  const auto ncat = get_u64(in);
  for (std::uint64_t c = 0; c < ncat; ++c) {
    CategoricalInfo info;
    info.name = get_str(in);
    info.categories.resize(get_u64(in));
    for (auto& s : info.categories) s = get_str(in);
    CategoricalColumn col(rows);
    for (auto& code : col) code = static_cast<std::int32_t>(static_cast<std::uint32_t>(get_u64(in)));
    d.categorical.push_back(std::move(col));
    d.categorical_info.push_back(std::move(info));
  }
  d.standardization.mean = get_row(in);
  d.standardization.std = get_row(in);
  return d;
}

}  // namespace rpk
