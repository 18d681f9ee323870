#include "oracles.hpp"

#include "rpk/errors.hpp"
#include "rpk/fast_cluster.hpp"
#include "rpk/gp.hpp"
#include "rpk/sampler.hpp"

#include <doctest.h>
#include <numbers>

using namespace rpk;

namespace {
std::shared_ptr<const PartitionEnsemble> wrap(std::vector<Partition> parts) {
  return std::make_shared<const PartitionEnsemble>(std::move(parts));
}

struct DenseRef {
  Vector alpha, mean, var;
};

DenseRef dense_gp(const Matrix& k, const Matrix& kx, const Vector& y, double noise) {
  Matrix a = k;
  a.diagonal().array() += noise;
  const Eigen::LLT<Matrix> llt(a);
  DenseRef r;
  r.alpha = llt.solve(y);
  r.mean = kx * r.alpha;
  const Matrix sol = llt.solve(kx.transpose());
  r.var = Vector::Constant(kx.rows(), 1.0 + noise) - (kx * sol).diagonal();
  return r;
}

std::vector<std::vector<std::int32_t>> random_test_labels(const PartitionEnsemble& e, int n_test, std::mt19937_64& rng) {
  std::vector<std::vector<std::int32_t>> test(e.m());
  for (std::size_t r = 0; r < e.m(); ++r) {
    std::uniform_int_distribution<std::int32_t> lab(-1, static_cast<std::int32_t>(e[r].n_clusters()) - 1);
    for (int t = 0; t < n_test; ++t) test[r].push_back(lab(rng));
  }
  return test;
}
}  // namespace

TEST_CASE("fit on a single cluster") {
  GpOptions o;
  o.noise = 1.0;
  const auto model = gp_fit(wrap({Partition::single_cluster(3)}), Vector::Constant(3, 4.0), o);
  CHECK(oracle::rel_diff(model.alpha(), Vector::Ones(3)) < 1e-10);
  CHECK(model.report().converged);
}

TEST_CASE("zero targets give zero weights") {
  std::mt19937_64 rng(1);
  const auto model = gp_fit(oracle::random_ensemble(40, 5, rng), Vector::Zero(40));
  CHECK(model.alpha() == Vector::Zero(40));
}

TEST_CASE("fit matches a dense Cholesky solve") {
  std::mt19937_64 rng(2);
  const auto e = oracle::random_ensemble(150, 30, rng);
  const Vector y = oracle::random_vector(150, rng);
  for (bool pre : {true, false}) {
    GpOptions o;
    o.use_preconditioner = pre;
    const auto model = gp_fit(e, y, o);
    const Vector ref = dense_gp(oracle::gram(*e), Matrix::Zero(1, 150), y, o.noise).alpha;
    CHECK(oracle::rel_diff(model.alpha(), ref) < 1e-6);
    Matrix a = oracle::gram(*e, o.noise);
    CHECK((a * model.alpha() - y).norm() / y.norm() <= 1e-8 * 1.0001);
  }
}

TEST_CASE("fit errors") {
  std::mt19937_64 rng(3);
  const auto e = oracle::random_ensemble(20, 3, rng);
  CHECK_THROWS_AS(gp_fit(e, Vector::Zero(19)), DimensionError);
  GpOptions bad;
  bad.noise = 0.0;
  CHECK_THROWS_AS(gp_fit(e, Vector::Ones(20), bad), ParameterError);
  Vector y = Vector::Ones(20);
  y[2] = std::nan("");
  CHECK_THROWS_AS(gp_fit(e, y), DataError);
  GpOptions capped;
  capped.max_iter = 1;
  capped.noise = 1e-4;
  capped.use_preconditioner = false;
  try {
    gp_fit(oracle::random_ensemble(100, 20, rng), oracle::random_vector(100, rng), capped);
    FAIL("expected a solver error");
  } catch (const SolverError& err) {
    CHECK(err.kind() == ErrorKind::Solver);
    CHECK_FALSE(err.report().converged);
    CHECK(err.report().iterations == 1);
  }
}

TEST_CASE("a test point sharing clusters with exactly one training point") {
  std::mt19937_64 rng(4);
  const std::size_t n = 12, j = 5;
  const auto e = wrap({Partition::singletons(n), Partition::singletons(n), Partition::singletons(n)});
  const Vector y = oracle::random_vector(static_cast<Eigen::Index>(n), rng);
  const auto model = gp_fit(e, y);
  const CrossKernel cross(e, {{static_cast<std::int32_t>(j), -1}, {static_cast<std::int32_t>(j), -1}, {static_cast<std::int32_t>(j), -1}});
  const auto pred = gp_predict(model, cross);
  CHECK(pred.mean[0] == doctest::Approx(model.alpha()[static_cast<Eigen::Index>(j)]).epsilon(1e-12));
  // The second test point is alone everywhere: prior mean and variance.
  CHECK(pred.mean[1] == 0.0);
  CHECK(pred.variance[1] == doctest::Approx(1.0 + model.noise()).epsilon(1e-15));
}

TEST_CASE("predictions match dense GP formulas") {
  std::mt19937_64 rng(5);
  const auto e = oracle::random_ensemble(100, 20, rng);
  const Vector y = oracle::random_vector(100, rng);
  const auto test = random_test_labels(*e, 20, rng);
  const CrossKernel cross(e, test);
  const auto model = gp_fit(e, y);
  const auto pred = gp_predict(model, cross);
  const auto ref = dense_gp(oracle::gram(*e), oracle::cross_gram(*e, test), y, 1e-2);
  CHECK(oracle::rel_diff(pred.mean, ref.mean) < 1e-6);
  CHECK(oracle::rel_diff(pred.variance, ref.var) < 1e-6);
  CHECK(pred.all_converged);
  CHECK(pred.clamped == 0);
  CHECK((pred.variance.array() > 0).all());
  CHECK((pred.variance.array() <= 1.0 + 1e-2 + 1e-12).all());
}

TEST_CASE("standardized targets are de-standardized exactly") {
  std::mt19937_64 rng(6);
  const auto e = oracle::random_ensemble(60, 10, rng);
  const Vector y = (oracle::random_vector(60, rng).array() * 7.0 + 30.0).matrix();
  const auto test = random_test_labels(*e, 15, rng);
  GpOptions o;
  o.standardize_targets = true;
  const auto model = gp_fit(e, y, o);
  const auto pred = gp_predict(model, CrossKernel(e, test));
  const double mu = y.mean();
  const double sd = std::sqrt((y.array() - mu).square().mean());
  CHECK(model.target_mean() == doctest::Approx(mu));
  CHECK(model.target_scale() == doctest::Approx(sd));
  const auto ref = dense_gp(oracle::gram(*e), oracle::cross_gram(*e, test), (y.array() - mu) / sd, 1e-2);
  CHECK(oracle::rel_diff(pred.mean, (ref.mean.array() * sd + mu).matrix()) < 1e-6);
  CHECK(oracle::rel_diff(pred.variance, ref.var * sd * sd) < 1e-6);
}

TEST_CASE("tiny noise interpolates a duplicated training row") {
  // 1-D Fast Cluster ensemble on 30 points: samples with 2^s >= N make every
  // point its own cluster, so the Gram matrix is full rank.
  std::mt19937_64 rng(7);
  RowMatrix x(30, 1);
  for (Eigen::Index i = 0; i < 30; ++i) x(i, 0) = std::uniform_real_distribution<double>(0, 10)(rng);
  const Vector y = x.col(0).array().sin();
  SamplerSpec spec;
  spec.kind = SamplerKind::FastCluster;
  spec.seed = 8;
  const SamplerInput in{&x, &y, nullptr};
  const auto sampled = sample_ensemble(spec, in, 100);
  REQUIRE(oracle::min_eigenvalue(GramOperator(sampled.ensemble).dense()) > 1e-6);
  GpOptions o;
  o.noise = 1e-6;
  o.tol = 1e-12;
  o.max_iter = 20000;
  const auto model = gp_fit(sampled.ensemble, y, o);
  const RowMatrix dup = x.topRows(5);
  const SamplerInput test{&dup, nullptr, nullptr};
  const auto pred = gp_predict(model, sampled.extend(test));
  for (Eigen::Index i = 0; i < 5; ++i) CHECK(std::abs(pred.mean[i] - y[i]) < 1e-3);
}

TEST_CASE("evaluate closed forms") {
  const Vector y = (Vector(4) << 1, 2, 3, 4).finished();
  Prediction perfect;
  perfect.mean = y;
  perfect.variance = Vector::Constant(4, 0.01);
  const auto m = gp_evaluate(perfect, y);
  CHECK(m.mse == 0.0);
  CHECK(m.mean_log_likelihood == doctest::Approx(-0.5 * std::log(2 * std::numbers::pi * 0.01)));

  Prediction prior;
  prior.mean = Vector::Constant(4, y.mean());
  prior.variance = Vector::Ones(4);
  CHECK(gp_evaluate(prior, y).mse == doctest::Approx((y.array() - y.mean()).square().mean()));
  CHECK_THROWS_AS(gp_evaluate(prior, Vector::Ones(3)), DimensionError);
}

TEST_CASE("constant-prior predictions score the test variance") {
  // Test points alone in every partition predict the training mean.
  std::mt19937_64 rng(9);
  const auto e = oracle::random_ensemble(50, 8, rng);
  const Vector y_train = oracle::random_vector(50, rng);
  const Vector y_test = oracle::random_vector(200, rng);
  GpOptions o;
  o.standardize_targets = true;
  const auto model = gp_fit(e, y_train, o);
  const auto pred = gp_predict(model, CrossKernel(e, std::vector<std::vector<std::int32_t>>(8, std::vector<std::int32_t>(200, -1))));
  const double var_test = (y_test.array() - y_test.mean()).square().mean();
  const auto metrics = gp_evaluate(pred, y_test);
  CHECK(metrics.mse == doctest::Approx(var_test + std::pow(y_test.mean() - y_train.mean(), 2)).epsilon(1e-12));
  CHECK(metrics.mse == doctest::Approx(var_test).epsilon(0.2));
}

TEST_CASE("log-likelihood equals a recomputation from the stored predictions") {
  std::mt19937_64 rng(10);
  const auto e = oracle::random_ensemble(80, 10, rng);
  const Vector y = oracle::random_vector(80, rng);
  const auto test = random_test_labels(*e, 40, rng);
  const auto pred = gp_predict(gp_fit(e, y), CrossKernel(e, test));
  const Vector y_test = oracle::random_vector(40, rng);
  const auto m = gp_evaluate(pred, y_test);
  double ll = 0;
  for (Eigen::Index i = 0; i < 40; ++i) {
    const double v = m.variance[i];
    ll += -0.5 * std::log(2 * std::numbers::pi * v) - 0.5 * std::pow(y_test[i] - m.mean[i], 2) / v;
  }
  CHECK(m.mean_log_likelihood == doctest::Approx(ll / 40).epsilon(1e-14));
  CHECK(m.mse >= 0.0);
}

TEST_CASE("predict checks shapes") {
  std::mt19937_64 rng(11);
  const auto e = oracle::random_ensemble(20, 3, rng);
  const auto model = gp_fit(e, Vector::Ones(20));
  const auto other = oracle::random_ensemble(21, 3, rng);
  CHECK_THROWS_AS(gp_predict(model, CrossKernel(other, random_test_labels(*other, 2, rng))), DimensionError);
}
