#pragma once

#include "rpk/categorical.hpp"
#include "rpk/sampler.hpp"
#include "rpk/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace rpk {

// Per-column affine map x -> (x - mean) / scale. Constant columns report
// std = 0 and use scale 1, so they standardize to exactly 0.
struct Standardization {
  Eigen::RowVectorXd mean;
  Eigen::RowVectorXd std;

  bool empty() const noexcept { return mean.size() == 0; }
  double scale(Eigen::Index j) const { return std[j] > 0.0 ? std[j] : 1.0; }
  void apply(RowMatrix& x) const;
};

Standardization compute_standardization(const RowMatrix& x);

struct CategoricalInfo {
  std::string name;
  std::vector<std::string> categories;  // code -> category text
};

struct Dataset {
  std::string name;
  RowMatrix x;
  std::optional<Vector> y;
  std::vector<std::string> feature_names;
  std::string target_name;
  std::vector<CategoricalColumn> categorical;
  std::vector<CategoricalInfo> categorical_info;
  Standardization standardization;  // applied to x when non-empty

  std::size_t rows() const noexcept { return static_cast<std::size_t>(x.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(x.cols()); }
  const Vector& target() const;
  // Pointers into this dataset; valid while it lives.
  SamplerInput sampler_input() const;
  Dataset subset(const std::vector<std::size_t>& rows) const;
};

struct CsvOptions {
  char delimiter = ',';
  std::string target;                    // empty means no target
  std::vector<std::string> categorical;  // forced categorical
  std::vector<std::string> numeric;      // forced numeric: unparseable cells are errors
  std::vector<std::string> ignore;
  // Numeric columns that are additionally coded as categorical columns.
  std::vector<std::string> also_categorical;
  std::vector<std::string> missing_tokens{"", "?", "NA", "NaN", "nan", "null"};
  std::string name;
};

struct RowIssue {
  std::size_t line = 0;  // 1-based, header is line 1
  std::string column;
  std::string message;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_kept = 0;
  std::size_t rows_dropped = 0;  // rows with a missing value
  std::vector<RowIssue> issues;

  std::string to_text() const;
};

struct LoadResult {
  Dataset dataset;
  IngestReport report;
};

// Parses a delimited file with a header row. Columns whose non-missing
// cells all parse as numbers are numeric, others categorical (coded by first
// appearance). Rows with a missing cell are dropped and counted. A cell that
// fails to parse in a column forced numeric raises DataError listing the
// offending rows.
LoadResult parse_csv(std::istream& in, const CsvOptions& options = {});
LoadResult load_csv(const std::filesystem::path& path, CsvOptions options = {});

struct SplitSpec {
  double train_fraction = 0.5;
  std::uint64_t seed = 0;
};

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
};

// Seeded shuffle split. Feature standardization statistics are computed on
// the training rows only and applied to both halves.
SplitResult split(const Dataset& dataset, const SplitSpec& spec);

// 1-D piecewise-constant regression toy on [0, 10].
struct PiecewiseTruth {
  std::vector<double> breaks{2.5, 5.0, 7.5};
  std::vector<double> levels{-1.0, 1.5, 0.5, 2.0};
  double operator()(double x) const;
};
Dataset synth_piecewise(std::size_t n, double noise, std::uint64_t seed);

// Gaussian blobs in D dimensions for timing runs; the target is a smooth
// function of the first coordinate.
Dataset synth_scaling(std::size_t n, std::size_t d, std::uint64_t seed);

// Versioned binary dataset format ("RPKD"); round-trips x and y bit-exactly.
void write_dataset(std::ostream& out, const Dataset& d);
Dataset read_dataset(std::istream& in);

// Registered desk-scale datasets: "mpg", "bodyfat", "piecewise". CSV files
// are looked up in $RPK_DATA_DIR, then the bundled data directory; when
// bodyfat.csv is absent a synthetic anthropometric analog is generated.
std::vector<std::string> registered_datasets();
LoadResult load_registered(const std::string& name);
// Resolves a registered name or a CSV path (target given separately).
LoadResult load_dataset(const std::string& ref, const std::string& target = {});
Dataset synth_bodyfat_like(std::uint64_t seed = 252);

}  // namespace rpk
