#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "doctest.h"
#include "support.hpp"
#include "needle/io.hpp"

using namespace needle;
using needle::testing::error_kind;

namespace {

std::filesystem::path scratch_dir() {
  auto dir = std::filesystem::temp_directory_path() / "needle_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("matrix and graph specs") {
  const Json matrix = Json::parse(R"({"points": ["a", "b", "c"],
    "metric": {"type": "matrix", "data": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]},
    "weights": [1, 2, 1]})");
  auto m = parse_space(matrix);
  CHECK(m.space.size() == 3);
  CHECK(m.space.ids()[1] == "b");
  CHECK(m.space.distance(0, 2) == 2.0);
  CHECK(m.space.weight(1) == doctest::Approx(0.5));
  CHECK_FALSE(m.density.has_value());

  const Json graph = Json::parse(R"({"points": ["x", "y", "z"],
    "metric": {"type": "graph", "edges": [[0, 1, 1.5], [1, 2, 2.0]]}})");
  auto g = parse_space(graph);
  CHECK(g.space.distance(0, 2) == doctest::Approx(3.5));
}

TEST_CASE("generated specs") {
  auto iv = parse_space(Json::parse(R"({"metric": {"type": "interval", "K": 1, "N": 2, "D": 3.141592653589793, "n": 50}})"));
  CHECK(iv.space.size() == 50);
  REQUIRE(iv.density.has_value());
  REQUIRE(iv.model.has_value());
  CHECK(iv.model->K == 1.0);
  auto sp = parse_space(Json::parse(R"({"metric": {"type": "sphere2", "n": 40, "seed": 3}})"));
  CHECK(sp.space.size() == 40);
}

TEST_CASE("malformed specs") {
  CHECK(error_kind([] { parse_space(Json::parse(R"({"metric": {"type": "torus"}})")); }) == "ConfigError");
  CHECK(error_kind([] { parse_space(Json::parse(R"({"points": []})")); }) == "ConfigError");
  CHECK(error_kind([] {
    parse_space(Json::parse(R"({"points": ["a", "b"], "metric": {"type": "graph", "edges": [[0, 5, 1]]}})"));
  }) == "ConfigError");
  CHECK(error_kind([] { parse_space(Json::parse(R"({"metric": {"type": "interval", "K": 1, "N": 2, "D": 1, "n": 2.5}})")); }) ==
        "ConfigError");
  CHECK(error_kind([] { load_space("/nonexistent/space.json"); }) == "IOError");
}

TEST_CASE("marginals by id and by position") {
  auto s = parse_space(Json::parse(R"({"points": ["a", "b", "c"],
    "metric": {"type": "matrix", "data": [[0, 1, 2], [1, 0, 1], [2, 1, 0]]}})"));
  auto [mu0, mu1] = parse_marginals(Json::parse(R"({"mu0": {"a": 1}, "mu1": [0, 0.5, 0.5]})"), s.space);
  CHECK(mu0 == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(mu1 == std::vector<double>{0.0, 0.5, 0.5});
  CHECK(error_kind([&] { parse_marginals(Json::parse(R"({"mu0": {"q": 1}, "mu1": [1, 0, 0]})"), s.space); }) ==
        "ConfigError");
  CHECK(error_kind([&] { parse_marginals(Json::parse(R"({"mu0": [1, 0], "mu1": [1, 0, 0]})"), s.space); }) ==
        "ConfigError");
}

TEST_CASE("non-finite numbers are tagged") {
  CHECK(number(1.5) == Json(1.5));
  CHECK(number(std::numeric_limits<double>::infinity()) == Json("inf"));
  CHECK(number(-std::numeric_limits<double>::infinity()) == Json("-inf"));
  CHECK(number(std::nan("")) == Json("nan"));
}

TEST_CASE("density CSV round trip and atomic writes") {
  const auto dir = scratch_dir();
  const Density1D h({0.0, 0.5, 1.0}, {1.0, 2.0, 0.25});
  const auto path = (dir / "density.csv").string();
  write_text_atomic(path, density_csv(h));
  auto back = load_density_csv(path);
  CHECK(back.grid == h.grid);
  CHECK(back.values == h.values);

  // Extra columns in any order are tolerated.
  const auto reordered = (dir / "reordered.csv").string();
  write_text_atomic(reordered, "h,note,t\n1,x,0\n3,y,2\n");
  auto r = load_density_csv(reordered);
  CHECK(r.grid == std::vector<double>{0.0, 2.0});
  CHECK(r.values == std::vector<double>{1.0, 3.0});

  const auto bad = (dir / "bad.csv").string();
  write_text_atomic(bad, "t,h\n0,abc\n");
  CHECK(error_kind([&] { load_density_csv(bad); }) == "ConfigError");

  const auto json_path = (dir / "doc.json").string();
  write_json_atomic(json_path, Json{{"x", 1}});
  CHECK(read_json(json_path)["x"] == 1);
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CHECK(entry.path().string().find(".tmp.") == std::string::npos);
  }
}
