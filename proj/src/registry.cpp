#include "rpk/dataset.hpp"
#include "rpk/errors.hpp"
#include "rpk/seed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>

#ifndef RPK_DEFAULT_DATA_DIR
#define RPK_DEFAULT_DATA_DIR "data"
#endif

namespace rpk {

namespace {

std::filesystem::path data_dir() {
  if (const char* env = std::getenv("RPK_DATA_DIR"); env && *env) return env;
  return RPK_DEFAULT_DATA_DIR;
}

}  // namespace

std::vector<std::string> registered_datasets() { return {"mpg", "bodyfat", "piecewise"}; }

Dataset synth_bodyfat_like(std::uint64_t seed) {
  // Two latent factors (frame size, adiposity) drive 13 body measurements;
  // body-fat percentage depends mostly on adiposity with a mild age effect.
  constexpr std::size_t kRows = 252;
  auto rng = SamplerSeed{seed, 7}.engine();
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> age_dist(22.0, 81.0);
  Dataset d;
  d.name = "bodyfat";
  d.target_name = "bodyfat";
  d.feature_names = {"age", "weight", "height", "neck", "chest", "abdomen", "hip",
                     "thigh", "knee", "ankle", "biceps", "forearm", "wrist"};
  d.x.resize(kRows, 13);
  Vector y(kRows);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(kRows); ++i) {
    const double age = age_dist(rng);
    const double frame = g(rng);
    const double fat = g(rng) + 0.01 * (age - 45.0);
    const double height = 70.0 + 2.6 * frame + 0.8 * g(rng);
    auto girth = [&](double base, double a, double b, double e) { return base + a * frame + b * fat + e * g(rng); };
    const double abdomen = girth(92.0, 3.0, 8.5, 2.0);
    d.x.row(i) << age, 0.0, height, girth(38.0, 1.2, 1.0, 0.8), girth(100.0, 4.0, 5.5, 2.5), abdomen,
        girth(99.0, 3.0, 4.5, 2.0), girth(59.0, 2.0, 3.2, 1.8), girth(38.5, 1.2, 0.9, 0.8),
        girth(23.0, 0.8, 0.3, 0.7), girth(32.0, 1.4, 1.5, 1.2), girth(28.6, 1.0, 0.5, 0.8),
        girth(18.2, 0.6, 0.2, 0.4);
    d.x(i, 1) = 178.0 + 16.0 * frame + 20.0 * fat + 6.0 * g(rng);
    double pct = 19.0 + 7.2 * fat + 0.6 * std::tanh(fat) * std::tanh(fat) - 1.1 * frame + 3.0 * g(rng);
    y[i] = std::clamp(pct, 0.0, 50.0);
  }
  d.y = std::move(y);
  return d;
}

LoadResult load_registered(const std::string& name) {
  if (name == "mpg") {
    CsvOptions opts;
    opts.name = "mpg";
    opts.target = "mpg";
    opts.ignore = {"car_name"};
    opts.also_categorical = {"cylinders", "model_year", "origin"};
    return load_csv(data_dir() / "mpg.csv", opts);
  }
  if (name == "bodyfat") {
    const auto path = data_dir() / "bodyfat.csv";
    if (std::filesystem::exists(path)) {
      CsvOptions opts;
      opts.name = "bodyfat";
      opts.target = "bodyfat";
      opts.ignore = {"density"};
      return load_csv(path, opts);
    }
    LoadResult r;
    r.dataset = synth_bodyfat_like();
    r.report.rows_read = r.report.rows_kept = r.dataset.rows();
    return r;
  }
  if (name == "piecewise") {
    LoadResult r;
    r.dataset = synth_piecewise(200, 0.1, 0);
    r.report.rows_read = r.report.rows_kept = r.dataset.rows();
    return r;
  }
  throw DataError("unknown dataset '" + name + "'");
}

LoadResult load_dataset(const std::string& ref, const std::string& target) {
  for (const auto& n : registered_datasets())
    if (ref == n) return load_registered(ref);
  std::filesystem::path path(ref);
  if (!std::filesystem::exists(path) && !path.is_absolute() && std::filesystem::exists(data_dir() / path))
    path = data_dir() / path;
  if (!std::filesystem::exists(path)) throw DataError("dataset '" + ref + "' is neither registered nor a file");
  CsvOptions opts;
  opts.target = target;
  return load_csv(path, opts);
}

}  // namespace rpk
