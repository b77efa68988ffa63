#include <cstdio>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "srwrate/errors.hpp"
#include "srwrate/io.hpp"

using namespace srwrate;

TEST_CASE("measure JSON round trip is exact") {
  const auto mu = sample_empirical(Sampler::uniform_ball(3, 5), 17);
  const auto back = measure_from_json(Json::parse(dump_json(measure_to_json(mu))));
  CHECK(back.points() == mu.points());
  CHECK(back.weights() == mu.weights());
  const auto path = std::filesystem::temp_directory_path() / "srwrate_io_test.json";
  save_measure(mu, path);
  const auto loaded = load_measure(path);
  CHECK(loaded.points() == mu.points());
  std::filesystem::remove(path);
}

TEST_CASE("loader rejects malformed measures") {
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim": 2, "points": [[0.1, 0.2]], "weights": [0.5]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim": 2, "points": [[0.1]], "weights": [1]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim": 1, "points": [[2.0]], "weights": [1]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"dim": 1, "points": [["x"]], "weights": [1]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(measure_from_json(Json::parse(R"({"points": [[0.0]], "weights": [1]})")),
                  InvalidArgument);
  CHECK_THROWS_AS(load_measure("/nonexistent/measure.json"), InvalidArgument);
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(dump_json(Json{{"a", 1.5}, {"b", 2}}) == R"({"a":1.5,"b":2})");
}
