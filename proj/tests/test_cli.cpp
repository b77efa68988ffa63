#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

namespace {

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(SRWRATE_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t got;
  while ((got = std::fread(buf.data(), 1, buf.size(), p)) > 0) out.append(buf.data(), got);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

const std::filesystem::path kDir = std::filesystem::temp_directory_path() / "srwrate_cli_test";

}  // namespace

TEST_CASE("construct then dist") {
  std::filesystem::create_directories(kDir);
  const auto m = (kDir / "m.json").string();
  auto c = run("construct --n 20 --seed 3 --out " + m);
  REQUIRE(c.code == 0);
  const auto info = nlohmann::json::parse(c.out);
  CHECK(info["dim"] == 3);
  CHECK(info["min_pairwise_distance"].get<double>() > 1.0 / 3);
  for (const char* metric : {"w1", "w2", "s1"}) {
    auto d = run(std::string("dist --metric ") + metric + " --mu " + m + " --nu " + m);
    REQUIRE(d.code == 0);
    CHECK(nlohmann::json::parse(d.out)["distance"].get<double>() == doctest::Approx(0.0));
  }
  auto sk = run("dist --metric sk --k 2 --mu " + m + " --nu " + m);
  CHECK(sk.code == 0);
  CHECK(nlohmann::json::parse(sk.out).contains("fw_gap"));
}

TEST_CASE("rate output is byte-stable") {
  std::filesystem::create_directories(kDir);
  const std::string common =
      "rate --metric w2 --sampler uniform-ball:d=3 --n-schedule 4,8 --trials 2 --seed 7 "
      "--reference-size 64 --threads 1";
  REQUIRE(run(common + " --out " + (kDir / "a.csv").string() + " --json " + (kDir / "a.json").string()).code == 0);
  REQUIRE(run(common + " --out " + (kDir / "b.csv").string() + " --json " + (kDir / "b.json").string()).code == 0);
  CHECK(slurp(kDir / "a.csv") == slurp(kDir / "b.csv"));
  CHECK(slurp(kDir / "a.json") == slurp(kDir / "b.json"));
  CHECK(slurp(kDir / "a.csv").rfind("n,trials,mean_dist", 0) == 0);
}

TEST_CASE("bounds and verify") {
  auto b = run("bounds --d 5 --n 1000000 --q 20");
  REQUIRE(b.code == 0);
  const auto j = nlohmann::json::parse(b.out);
  CHECK(j["t_star"] == 5);
  CHECK(j["upper_curve"].get<double>() == doctest::Approx(0.43597).epsilon(1e-4));
  auto v = run("verify --suite lemmas");
  CHECK(v.code == 0);
  CHECK(v.out.find("FAIL") == std::string::npos);
}

TEST_CASE("usage errors exit with 2") {
  CHECK(run("").code == 2);
  CHECK(run("dist --metric w7 --mu a --nu b").code == 2);
  CHECK(run("dist --metric w2 --mu /nonexistent.json --nu /nonexistent.json").code == 2);
  CHECK(run("rate --sampler uniform-ball:d=3 --n-schedule 8,4 --out /tmp/x.csv").code == 2);
  CHECK(run("--version").code == 0);
}
