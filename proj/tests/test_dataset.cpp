#include "rpk/dataset.hpp"
#include "rpk/errors.hpp"

#include <doctest.h>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

using namespace rpk;

namespace {
LoadResult parse(const std::string& text, CsvOptions opts = {}) {
  std::istringstream in(text);
  return parse_csv(in, opts);
}
}  // namespace

TEST_CASE("numeric csv parses to bit-equal values") {
  const auto r = parse("a,b,c\n0.1,2,-3e-5\n1.7976931348623157e308,0,5\n  7 ,8,+9\n");
  const auto& d = r.dataset;
  CHECK(d.rows() == 3);
  CHECK(d.cols() == 3);
  CHECK(d.x(0, 0) == 0.1);
  CHECK(d.x(0, 2) == -3e-5);
  CHECK(d.x(1, 0) == 1.7976931348623157e308);
  CHECK(d.x(2, 0) == 7.0);
  CHECK(d.x(2, 2) == 9.0);
  CHECK(d.feature_names == std::vector<std::string>{"a", "b", "c"});
  CHECK_FALSE(d.y.has_value());
  CHECK(r.report.rows_read == 3);
  CHECK(r.report.rows_dropped == 0);
}

TEST_CASE("rows with a missing cell are dropped and counted") {
  CsvOptions o;
  o.target = "y";
  const auto r = parse("x,y\n1,2\n?,3\n4,\n5,6\n", o);
  CHECK(r.dataset.rows() == 2);
  CHECK(r.report.rows_dropped == 2);
  CHECK(r.report.rows_kept == 2);
  CHECK(*r.dataset.y == (Vector(2) << 2, 6).finished());
  CHECK(r.dataset.target_name == "y");
  CHECK(r.dataset.x.allFinite());
  CHECK(r.report.to_text().find("rows_dropped_missing: 2") != std::string::npos);
  const auto one = parse("x,y\n1,2\nNA,3\n5,6\n", o);
  CHECK(one.dataset.rows() == 2);
  CHECK(one.report.rows_dropped == 1);
}

TEST_CASE("categorical columns are coded by first appearance") {
  const auto r = parse("v,c\n1,a\n2,b\n3,a\n");
  const auto& d = r.dataset;
  CHECK(d.cols() == 1);
  REQUIRE(d.categorical.size() == 1);
  CHECK(d.categorical[0] == CategoricalColumn{0, 1, 0});
  CHECK(d.categorical_info[0].categories == std::vector<std::string>{"a", "b"});
  CHECK(d.categorical_info[0].name == "c");
}

TEST_CASE("forced roles, ignored columns, quoting and delimiters") {
  CsvOptions o;
  o.delimiter = ';';
  o.categorical = {"code"};
  o.also_categorical = {"n"};
  o.ignore = {"skip"};
  const auto r = parse("code;n;skip;name\n1;10;x;\"a;b\"\n2;20;y;\"c \"\"q\"\"\"\n1;10;z;e\n", o);
  const auto& d = r.dataset;
  CHECK(d.feature_names == std::vector<std::string>{"n"});
  REQUIRE(d.categorical.size() == 3);
  CHECK(d.categorical_info[0].name == "code");
  CHECK(d.categorical_info[1].name == "n");
  CHECK(d.categorical[1] == CategoricalColumn{0, 1, 0});
  CHECK(d.categorical_info[2].categories == std::vector<std::string>{"a;b", "c \"q\"", "e"});
}

TEST_CASE("ingest errors") {
  CHECK_THROWS_AS(parse(""), DataError);
  CHECK_THROWS_AS(parse("a,b\n"), DataError);
  CHECK_THROWS_AS(parse("a,b\n1,2,3\n"), DataError);
  CsvOptions t;
  t.target = "missing";
  CHECK_THROWS_AS(parse("a,b\n1,2\n", t), DataError);
  CsvOptions n;
  n.numeric = {"a"};
  try {
    parse("a,b\n1,2\nxx,3\n4,5\nyy,1\n", n);
    FAIL("expected a data error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("line 5") != std::string::npos);
  }
  CsvOptions target;
  target.target = "y";
  CHECK_THROWS_AS(parse("x,y\n1,a\n", target), DataError);
  CHECK_THROWS_AS(load_csv("/nonexistent/file.csv"), DataError);
}

TEST_CASE("split sizes, determinism, disjointness and coverage") {
  const auto d = synth_piecewise(10, 0.1, 3);
  const auto a = split(d, {0.5, 7});
  const auto b = split(d, {0.5, 7});
  CHECK(a.train.rows() == 5);
  CHECK(a.test.rows() == 5);
  CHECK(a.train_rows == b.train_rows);
  CHECK(a.train.x == b.train.x);
  std::set<std::size_t> all(a.train_rows.begin(), a.train_rows.end());
  for (auto r : a.test_rows) CHECK(all.insert(r).second);
  CHECK(all.size() == 10);
  CHECK(split(d, {0.5, 8}).train_rows != a.train_rows);
  CHECK(split(d, {0.01, 1}).train.rows() == 1);
  CHECK(split(d, {0.99, 1}).test.rows() == 1);
  CHECK_THROWS_AS(split(d, {0.0, 1}), ParameterError);
  CHECK_THROWS_AS(split(d, {1.0, 1}), ParameterError);
  CHECK_THROWS_AS(split(d, {-0.5, 1}), ParameterError);
}

TEST_CASE("standardization uses training statistics only") {
  const auto raw = synth_bodyfat_like(3);
  const auto s = split(raw, {0.5, 11});
  // Recomputing on the raw training rows reproduces the stored statistics.
  const auto again = compute_standardization(raw.subset(s.train_rows).x);
  CHECK(again.mean == s.train.standardization.mean);
  CHECK(again.std == s.train.standardization.std);
  CHECK(s.test.standardization.mean == s.train.standardization.mean);
  // Standardized training columns: |mean| <= 1e-9, std 1.
  for (Eigen::Index j = 0; j < s.train.x.cols(); ++j) {
    const auto col = s.train.x.col(j);
    CHECK(std::abs(col.mean()) <= 1e-9);
    CHECK(std::sqrt((col.array() - col.mean()).square().mean()) == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Test rows use the training map exactly.
  const RowMatrix raw_test = raw.subset(s.test_rows).x;
  for (Eigen::Index j = 0; j < raw_test.cols(); ++j)
    CHECK(s.test.x(0, j) == (raw_test(0, j) - again.mean[j]) / again.std[j]);
  CHECK(*s.test.y == *raw.subset(s.test_rows).y);
}

TEST_CASE("constant columns standardize to zero with std reported as 0") {
  auto r = parse("a,b\n1,5\n2,5\n3,5\n4,5\n");
  const auto s = split(r.dataset, {0.5, 1});
  CHECK(s.train.standardization.std[1] == 0.0);
  CHECK(s.train.x.col(1) == Vector::Zero(2));
  CHECK(s.test.x.col(1) == Vector::Zero(2));
}

TEST_CASE("piecewise generator") {
  const auto d = synth_piecewise(50, 0.0, 4);
  const PiecewiseTruth truth;
  for (Eigen::Index i = 0; i < 50; ++i) CHECK((*d.y)[i] == truth(d.x(i, 0)));
  CHECK(synth_piecewise(50, 0.3, 4).x == synth_piecewise(50, 0.3, 4).x);
  CHECK(*synth_piecewise(50, 0.3, 4).y == *synth_piecewise(50, 0.3, 4).y);
  CHECK(*synth_piecewise(50, 0.3, 5).y != *synth_piecewise(50, 0.3, 4).y);
  CHECK_THROWS_AS(synth_piecewise(9, 0.1, 0), ParameterError);
  CHECK(truth(0.0) == -1.0);
  CHECK(truth(2.5) == 1.5);
  CHECK(truth(9.9) == 2.0);
}

TEST_CASE("binary dataset round-trip is bit-exact") {
  auto d = load_registered("mpg").dataset;
  d.standardization = compute_standardization(d.x);
  d.x(0, 0) = -0.0;
  d.x(1, 1) = 5e-324;
  std::stringstream buf;
  write_dataset(buf, d);
  const auto back = read_dataset(buf);
  CHECK(std::memcmp(back.x.data(), d.x.data(), sizeof(double) * static_cast<std::size_t>(d.x.size())) == 0);
  CHECK(std::signbit(back.x(0, 0)));
  CHECK(*back.y == *d.y);
  CHECK(back.feature_names == d.feature_names);
  CHECK(back.categorical == d.categorical);
  CHECK(back.categorical_info[0].categories == d.categorical_info[0].categories);
  CHECK(back.standardization.mean == d.standardization.mean);
  std::stringstream again;
  write_dataset(again, back);
  std::stringstream first;
  write_dataset(first, d);
  CHECK(again.str() == first.str());
  std::stringstream bad("RPKX");
  CHECK_THROWS_AS(read_dataset(bad), DataError);
}

TEST_CASE("registry") {
  const auto mpg = load_registered("mpg");
  CHECK(mpg.dataset.rows() + mpg.report.rows_dropped == mpg.report.rows_read);
  CHECK(mpg.report.rows_dropped > 0);
  CHECK(mpg.dataset.target_name == "mpg");
  CHECK(mpg.dataset.cols() == 7);
  CHECK(mpg.dataset.categorical.size() == 3);
  const auto bf = load_registered("bodyfat").dataset;
  CHECK(bf.rows() == 252);
  CHECK(bf.cols() == 13);
  CHECK(bf.y->minCoeff() >= 0.0);
  CHECK(load_registered("piecewise").dataset.cols() == 1);
  CHECK_THROWS_AS(load_registered("iris"), DataError);
  CHECK_THROWS_AS(load_dataset("no_such_file.csv"), DataError);
  CHECK(registered_datasets().size() == 3);
}

TEST_CASE("registry honours the data directory variable") {
  const auto dir = std::filesystem::temp_directory_path() / "rpk_registry_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "mpg.csv");
    f << "mpg,weight,car_name\n10,1,a\n20,2,b\n30,3,c\n";
  }
  setenv("RPK_DATA_DIR", dir.c_str(), 1);
  const auto d = load_registered("mpg").dataset;
  unsetenv("RPK_DATA_DIR");
  CHECK(d.rows() == 3);
  CHECK(d.feature_names == std::vector<std::string>{"weight"});
  std::filesystem::remove_all(dir);
}
