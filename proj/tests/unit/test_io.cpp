#include <doctest.h>

#include "generators.hpp"
#include "hand_models.hpp"
#include "qendy/error.hpp"
#include "qendy/io.hpp"
#include "qendy/systems.hpp"
#include "temp_dir.hpp"

#include <cmath>
#include <fstream>
#include <limits>

using namespace qendy;
using qendy::testing::Rng;
using qendy::testing::TempDir;

namespace {
void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
}
}  // namespace

TEST_CASE("property: format_double round-trips") {
  Rng rng(81);
  for (int k = 0; k < 2000; ++k) {
    const double v = testing::uniform(rng, -1.0, 1.0) * std::pow(10.0, testing::uniform(rng, -300.0, 300.0));
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
  CHECK(io::format_double(1.0) == "1");
  CHECK(std::isnan(std::stod(io::format_double(std::numeric_limits<double>::quiet_NaN()))));
}

TEST_CASE("CSV round trip") {
  TempDir dir;
  Rng rng(82);
  const Matrix rows = testing::random_matrix(rng, 7, 3);
  io::write_csv(dir / "a.csv", {"p", "q", "r"}, rows);
  const io::CsvTable t = io::read_csv(dir / "a.csv");
  CHECK(t.header == std::vector<std::string>{"p", "q", "r"});
  CHECK(t.rows == rows);
  CHECK_THROWS_AS(io::write_csv(dir / "b.csv", {"p"}, rows), InputError);

  io::write_matrix_csv(dir / "m.csv", rows);
  CHECK(io::read_matrix_csv(dir / "m.csv") == rows);
  CHECK_THROWS_AS(io::read_matrix_csv(dir / "missing.csv"), InputError);

  write_file(dir / "bad.csv", "a,b\n1,x\n");
  CHECK_THROWS_AS(io::read_csv(dir / "bad.csv"), InputError);
  write_file(dir / "ragged.csv", "a,b\n1,2\n3\n");
  CHECK_THROWS_AS(io::read_csv(dir / "ragged.csv"), InputError);
  write_file(dir / "empty.csv", "");
  CHECK_THROWS_AS(io::read_matrix_csv(dir / "empty.csv"), InputError);
}

TEST_CASE("trajectory and training files") {
  TempDir dir;
  const Trajectory tr = sample_trajectory(systems::pendulum(0.1), Vector::Ones(2), 1.0, 11);
  io::write_trajectory(dir / "t.csv", tr);
  const Trajectory back = io::read_trajectory(dir / "t.csv");
  CHECK(back.times == tr.times);
  CHECK(back.states == tr.states);

  const TrainingSet ts = exact_derivatives(systems::pendulum(0.1), tr.states);
  io::write_training_set(dir / "s.csv", ts);
  const TrainingSet ts2 = io::read_training_set(dir / "s.csv", Provenance::Exact);
  CHECK(ts2.states == ts.states);
  CHECK(ts2.derivatives == ts.derivatives);
  CHECK(ts2.provenance == Provenance::Exact);

  write_file(dir / "header_only.csv", "x1,dx1\n");
  CHECK_THROWS_AS(io::read_training_set(dir / "header_only.csv"), InputError);
  write_file(dir / "wrong.csv", "x1,x2,dx1\n1,2,3\n");
  CHECK_THROWS_AS(io::read_training_set(dir / "wrong.csv"), InputError);
  CHECK_THROWS_AS(io::read_trajectory(dir / "s.csv"), InputError);
}

TEST_CASE("model JSON round trips") {
  TempDir dir;
  const QuadraticModel m = testing::pendulum_embedding();
  io::write_json(dir / "model.json", io::model_to_json(m));
  const QuadraticModel back = io::model_from_json(io::read_json(dir / "model.json"));
  CHECK(back.a() == m.a());
  CHECK(back.b() == m.b());
  CHECK(back.c() == m.c());
  CHECK(back.g() == m.g());
  CHECK(back.dictionary().size() == 4);
  const Vector x = Eigen::Vector2d(0.3, -0.7);
  CHECK(back.extract_rhs(x) == m.extract_rhs(x));

  Matrix xi(2, 4);
  xi << 0, 1, 0, 0, 0, -0.1, -1, 0;
  const SindyModel s{systems::pendulum_dictionary(), xi};
  CHECK(io::sindy_from_json(io::sindy_to_json(s)).xi == xi);
  const GedmdModel g{systems::linear_lift_dictionary(), Matrix::Identity(3, 3)};
  CHECK(io::gedmd_from_json(io::gedmd_to_json(g)).theta == g.theta);

  Rng rng(83);
  const PcaBasis p = pca_fit(testing::random_matrix(rng, 10, 4), 2);
  const PcaBasis pb = io::pca_from_json(io::pca_to_json(p));
  CHECK(pb.components == p.components);
  CHECK(pb.mean == p.mean);
  CHECK(pb.spectrum == p.spectrum);
}

TEST_CASE("JSON validation") {
  io::Json j = io::model_to_json(testing::rational_embedding());
  j["extra"] = 1;
  CHECK_THROWS_AS(io::model_from_json(j), InputError);
  j.erase("extra");
  j["A"] = "nope";
  CHECK_THROWS_AS(io::model_from_json(j), InputError);

  io::Json d = io::dictionary_to_json(systems::rational_dictionary());
  d["bogus"] = true;
  CHECK_THROWS_AS(io::dictionary_from_json(d), InputError);
  io::Json s = io::sindy_to_json(SindyModel{systems::identity_dictionary(1), Matrix::Ones(1, 1)});
  s["kind"] = "qendy";
  s["Q"] = 2;
  CHECK_THROWS_AS(io::sindy_from_json(s), InputError);
  CHECK_THROWS_AS(io::matrix_from_json(io::Json::array({io::Json::array({1, 2}), io::Json::array({1})}), "M"), InputError);

  TempDir dir;
  write_file(dir / "bad.json", "{ not json");
  CHECK_THROWS_AS(io::read_json(dir / "bad.json"), InputError);
  CHECK_THROWS_AS(io::read_json(dir / "none.json"), InputError);
}
