#include <doctest.h>

#include "cli.hpp"
#include "qendy/io.hpp"
#include "temp_dir.hpp"

#include <fstream>
#include <sstream>

using namespace qendy;
using qendy::testing::TempDir;

namespace {
struct Result {
  int code = 0;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "qendy");
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

TEST_CASE("generate, fit, simulate and report on the pendulum") {
  TempDir dir;
  const std::string d = dir.path().string();
  Result r = run({"generate", "--system", "pendulum", "--m", "100", "--seed", "1", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "training.csv"));

  r = run({"fit", "--training", d + "/training.csv", "--system", "pendulum", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("loss") != std::string::npos);
  const QuadraticModel m = io::model_from_json(io::read_json(dir / "model.json"));
  CHECK(std::abs(m.b()(1, 2) + 1.0) < 1e-8);

  r = run({"simulate", "--model", d + "/model.json", "--system", "pendulum", "--x0", "1,0", "--t-end", "5", "--dt",
           "0.01", "--out", d});
  REQUIRE(r.code == 0);
  const io::Json summary = io::read_json(dir / "simulation_summary.json");
  CHECK(summary.is_object());
  const io::CsvTable sim = io::read_csv(dir / "simulation.csv");
  CHECK(sim.header.front() == "t");
  CHECK(sim.rows.rows() == 501);

  r = run({"report", "--model", d + "/model.json", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(dir / "coefficients.csv"));
  CHECK(std::filesystem::exists(dir / "sparsity.csv"));
  CHECK(std::filesystem::exists(dir / "eigenvalues.csv"));
}

TEST_CASE("baseline methods through the CLI") {
  TempDir dir;
  const std::string d = dir.path().string();
  REQUIRE(run({"generate", "--system", "pendulum", "--m", "50", "--out", d}).code == 0);
  Result r = run({"fit", "--training", d + "/training.csv", "--system", "pendulum", "--method", "sindy", "--out", d});
  REQUIRE(r.code == 0);
  const SindyModel s = io::sindy_from_json(io::read_json(dir / "model.json"));
  CHECK(std::abs(s.xi(1, 2) + 1.0) < 1e-8);
  r = run({"fit", "--training", d + "/training.csv", "--system", "pendulum", "--method", "gedmd", "--out", d});
  REQUIRE(r.code == 0);
  CHECK(io::read_json(dir / "model.json").at("kind") == "gedmd");
  r = run({"fit", "--training", d + "/training.csv", "--system", "pendulum", "--method", "magic", "--out", d});
  CHECK(r.code != 0);
}

TEST_CASE("reruns are byte-identical") {
  TempDir a;
  TempDir b;
  for (const TempDir* dir : {&a, &b}) {
    const std::string d = dir->path().string();
    REQUIRE(run({"generate", "--system", "thomas", "--m", "200", "--t-end", "20", "--out", d}).code == 0);
    REQUIRE(run({"fit", "--training", d + "/training.csv", "--system", "thomas", "--out", d}).code == 0);
    REQUIRE(run({"convergence", "--system", "pendulum", "--m", "50,500", "--runs", "3", "--seed", "9", "--out", d}).code == 0);
  }
  for (const char* f : {"training.csv", "trajectory.csv", "model.json", "convergence.csv", "convergence_runs.csv"}) {
    CHECK_MESSAGE(slurp(a / f) == slurp(b / f), f);
    CHECK(!slurp(a / f).empty());
  }
}

TEST_CASE("convergence with a single sample size reports no slope") {
  TempDir dir;
  const Result r = run({"convergence", "--system", "pendulum", "--m", "100", "--runs", "2", "--out", dir.path().string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("n/a") != std::string::npos);
}

TEST_CASE("reduce on synthetic data") {
  TempDir dir;
  const std::string d = dir.path().string();
  const Result r = run({"reduce", "--out", d});
  REQUIRE(r.code == 0);
  const io::Json report = io::read_json(dir / "report.json");
  CHECK(report.is_object());
  CHECK(std::filesystem::exists(dir / "pca.json"));
  CHECK(std::filesystem::exists(dir / "forecast.csv"));
}

TEST_CASE("configuration files and errors") {
  TempDir dir;
  const std::string d = dir.path().string();
  {
    std::ofstream(dir / "cfg.json") << R"({"system": "rational", "m": 11})";
  }
  REQUIRE(run({"generate", "--config", d + "/cfg.json", "--out", d}).code == 0);
  CHECK(io::read_training_set(dir / "training.csv").size() == 11);

  {
    std::ofstream(dir / "bad.json") << R"({"system": "rational", "colour": 3})";
  }
  Result r = run({"generate", "--config", d + "/bad.json", "--out", d});
  CHECK(r.code != 0);
  CHECK(r.err.find("colour") != std::string::npos);

  {
    std::ofstream(dir / "empty.csv") << "x1,dx1\n";
  }
  r = run({"fit", "--training", d + "/empty.csv", "--system", "rational", "--out", d});
  CHECK(r.code != 0);
  CHECK(r.err.find("error") != std::string::npos);

  r = run({"fit", "--training", d + "/missing.csv", "--system", "rational", "--out", d});
  CHECK(r.code != 0);

  r = run({"generate", "--system", "nonexistent", "--out", d});
  CHECK(r.code != 0);
  r = run({"generate", "--system", "pendulum", "--param", "c=0.2", "--m", "5", "--out", d});
  CHECK(r.code == 0);
  r = run({"generate", "--system", "pendulum", "--param", "c=0.2", "--param", "bogus=1", "--out", d});
  CHECK(r.code != 0);
  CHECK(r.err.find("bogus") != std::string::npos);
  r = run({});
  CHECK(r.code != 0);
}
