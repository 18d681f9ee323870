#include "rpk/dataset.hpp"
#include "rpk/partition.hpp"
#include "rpk/sampler.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = RPK_CLI_WORK_DIR;

int run(const std::string& args) {
  fs::create_directories(kWork);
  const std::string cmd = std::string(RPK_CLI_PATH) + " " + args + " >" + (kWork / "stdout.txt").string() +
                          " 2>" + (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::vector<std::string>> read_table(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

nlohmann::json sidecar(const fs::path& p) { return nlohmann::json::parse(slurp(p.string() + ".json")); }

fs::path toy_csv() {
  fs::create_directories(kWork);
  const auto p = kWork / "toy5.csv";
  std::ofstream(p) << "x1,x2,y\n0,0,1\n1,0,2\n0,1,3\n5,5,4\n6,5,5\n";
  return p;
}

fs::path toy20_csv() {
  const auto p = kWork / "toy20.csv";
  std::ofstream out(p);
  out << "x,y\n";
  for (int i = 0; i < 20; ++i) out << i * 0.5 << ',' << (i < 10 ? 0.0 : 1.0) + 0.01 * (i % 3) << "\n";
  return p;
}

}  // namespace

TEST_CASE("sample: 5-point fast-cluster file reloads to the in-memory ensemble") {
  const auto csv = toy_csv();
  const auto out = kWork / "toy.rpke";
  REQUIRE(run("sample --dataset " + csv.string() + " --target y --kernel fastcluster --m 1 --seed 3 --out " +
              out.string()) == 0);
  std::ifstream in(out, std::ios::binary);
  const auto file = rpk::read_ensemble(in);
  CHECK(file.ensemble.m() == 1);
  CHECK(file.ensemble.n() == 5);

  auto d = rpk::load_dataset(csv.string(), "y").dataset;
  rpk::compute_standardization(d.x).apply(d.x);
  rpk::SamplerSpec spec;
  spec.kind = rpk::SamplerKind::FastCluster;
  spec.seed = 3;
  CHECK(*rpk::sample_ensemble(spec, d.sampler_input(), 1).ensemble == file.ensemble);
  const auto prov = nlohmann::json::parse(file.provenance);
  CHECK(prov["config"]["seed"] == 3);
  CHECK(prov["sampler"]["kind"] == "fastcluster");
}

TEST_CASE("sample: same seed twice gives identical bytes") {
  const auto csv = toy_csv();
  const auto out = kWork / "same.rpke";
  const std::string args = "sample --dataset " + csv.string() + " --target y --kernel rf --m 20 --seed 9 --out " + out.string();
  REQUIRE(run(args) == 0);
  const auto first = slurp(out);
  REQUIRE(run(args) == 0);
  CHECK(slurp(out) == first);
  // The thread cap is recorded in the provenance but does not change the partitions.
  REQUIRE(run(args + " --threads 2") == 0);
  std::ifstream a(out, std::ios::binary);
  std::istringstream b(first);
  CHECK(rpk::read_ensemble(a).ensemble == rpk::read_ensemble(b).ensemble);
}

TEST_CASE("sample: m=200 on mpg records m and N") {
  const auto out = kWork / "mpg.rpke";
  REQUIRE(run("sample --dataset mpg --kernel rf --out " + out.string()) == 0);
  std::ifstream in(out, std::ios::binary);
  const auto file = rpk::read_ensemble(in);
  CHECK(file.ensemble.m() == 200);
  CHECK(file.ensemble.n() == rpk::load_registered("mpg").dataset.rows());
  CHECK(nlohmann::json::parse(file.provenance)["m"] == 200);
}

TEST_CASE("gp: rbf on a 20-point toy and the default m") {
  const auto csv = toy20_csv();
  const auto out = kWork / "gp_rbf.csv";
  REQUIRE(run("gp --dataset " + csv.string() + " --target y --kernel rbf --out " + out.string()) == 0);
  const auto t = read_table(out);
  REQUIRE(t.size() == 2);
  CHECK(t[0][6] == "mse");
  CHECK(std::stod(t[1][6]) >= 0.0);
  CHECK(std::isfinite(std::stod(t[1][7])));
  const auto j = sidecar(out);
  CHECK(j["config"]["m"] == 200);
  CHECK(j["version"] == std::string(rpk::kVersion));
  CHECK(j["config"]["command"] == "gp");
}

TEST_CASE("gp: reruns reproduce the numerical columns") {
  const auto csv = toy20_csv();
  const auto a = kWork / "gp_a.csv";
  const auto b = kWork / "gp_b.csv";
  REQUIRE(run("gp --dataset " + csv.string() + " --target y --kernel rf --m 30 --seed 4 --out " + a.string()) == 0);
  REQUIRE(run("gp --dataset " + csv.string() + " --target y --kernel rf --m 30 --seed 4 --out " + b.string()) == 0);
  auto ta = read_table(a);
  auto tb = read_table(b);
  ta[1].pop_back();  // wall time
  tb[1].pop_back();
  CHECK(ta == tb);
  auto ja = sidecar(a);
  auto jb = sidecar(b);
  ja["config"].erase("out");
  jb["config"].erase("out");
  CHECK(ja["config"] == jb["config"]);
  CHECK(ja["result"]["fit_solve"] == jb["result"]["fit_solve"]);
}

TEST_CASE("msweep with a single m gives one row") {
  const auto out = kWork / "sweep.csv";
  REQUIRE(run("msweep --dataset piecewise --kernel fastcluster --m-list 1 --seeds 2 --out " + out.string()) == 0);
  const auto t = read_table(out);
  CHECK(t.size() == 2);
  CHECK(t[1][0] == "1");
  CHECK(sidecar(out)["config"]["m_list"] == nlohmann::json::array({1}));
}

TEST_CASE("list flags accept comma-separated values") {
  const auto out = kWork / "sweep_commas.csv";
  REQUIRE(run("msweep --dataset piecewise --kernel fastcluster --m-list 1,3 --seeds 1 --out " + out.string()) == 0);
  const auto t = read_table(out);
  REQUIRE(t.size() == 3);
  CHECK(t[1][0] == "1");
  CHECK(t[2][0] == "3");
}

TEST_CASE("scaling with two sizes reports a slope") {
  const auto out = kWork / "scaling.csv";
  REQUIRE(run("scaling --kernel fastcluster --m 5 --n-list 500 1000 --out " + out.string()) == 0);
  CHECK(read_table(out).size() == 3);
  const auto j = sidecar(out);
  CHECK(j.contains("log_log_slope"));
  CHECK(j["config"]["m"] == 5);
  REQUIRE(run("scaling --kernel fastcluster --n-list 300 600 --out " + out.string()) == 0);
  CHECK(sidecar(out)["config"]["m"] == 100);
}

TEST_CASE("kpca: k=2 on bodyfat gives centered coordinates for every row") {
  const auto out = kWork / "kpca.csv";
  REQUIRE(run("kpca --dataset bodyfat --kernel rf --m 50 --k 2 --out " + out.string()) == 0);
  const auto t = read_table(out);
  REQUIRE(t.size() == 253);
  CHECK(t[0] == std::vector<std::string>{"split", "row", "pc1", "pc2"});
  double s1 = 0, s2 = 0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    s1 += std::stod(t[i][2]);
    s2 += std::stod(t[i][3]);
  }
  CHECK(std::abs(s1 / 252) < 1e-10);
  CHECK(std::abs(s2 / 252) < 1e-10);
  REQUIRE(run("kpca --dataset bodyfat --kernel fastcluster --m 20 --k 3 --with-test --out " + out.string()) == 0);
  CHECK(read_table(out).size() == 253);
}

TEST_CASE("exit codes") {
  CHECK(run("gp --dataset no_such_dataset") == 2);
  CHECK(run("gp --dataset mpg --kernel poly") == 3);
  CHECK(run("gp --dataset mpg --m 0") == 3);
  CHECK(run("gp --dataset mpg --train-fraction 1.5") == 3);
  CHECK(run("gp --dataset mpg --kernel rf --m 20 --max-iter 1 --no-precond --out " + (kWork / "fail.csv").string()) == 4);
  CHECK(sidecar(kWork / "fail.csv").contains("solve"));
  CHECK(run("gp --dataset bodyfat --kernel categorical") == 3);
  CHECK(run("--no-such-flag") == 3);
  CHECK(run("--version") == 0);
}
