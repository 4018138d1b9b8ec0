#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "spdesign/cli.hpp"

using namespace spd;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "spdesign_cli_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& f) {
  std::ifstream in(f);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("generate") {
  const std::vector<std::string> args{"generate", "--method", "sp", "--n", "5", "--p", "2", "--seed", "3",
                                      "--max-sweeps", "5"};
  const Run a = run(args), b = run(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out.rfind("x1,x2\n", 0) == 0);
  CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 6);

  const Run psp = run({"generate", "--method", "psp", "--prior", "exp:1.0", "--n", "4", "--p", "2", "--seed", "1",
                       "--max-sweeps", "2", "--batch-size", "64"});
  CHECK(psp.code == 0);
  CHECK(psp.out.rfind("x1,x2\n", 0) == 0);

  CHECK(run({"generate", "--method", "psp", "--prior", "exp:-1", "--n", "4", "--p", "2"}).code == 2);
  CHECK(run({"generate", "--method", "nope", "--n", "4", "--p", "2"}).code == 2);
  CHECK(run({"generate", "--method", "sp"}).code == 2);
}

TEST_CASE("eval") {
  const auto dir = scratch("eval");
  {
    std::ofstream f(dir / "corners.csv");
    f << "x1,x2\n0,0\n1,0\n0,1\n1,1\n";
  }
  const Run r = run({"eval", "--design", (dir / "corners.csv").string(), "--metrics", "maximin,energy", "--seed", "1"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["values"]["maximin"].get<double>() == 1.0);
  CHECK(j["values"]["energy"].get<double>() > 0.0);
  CHECK(j["meta"]["n"] == 4);

  CHECK(run({"eval", "--design", (dir / "corners.csv").string(), "--metrics", "bogus"}).code == 2);
  CHECK(run({"eval", "--design", (dir / "corners.csv").string(), "--metrics", "mml:3"}).code == 2);
  CHECK(run({"eval", "--design", (dir / "missing.csv").string(), "--metrics", "maximin"}).code == 2);
}

TEST_CASE("bench") {
  CHECK(run({"bench", "--study", "fig4"}).code == 2);
  CHECK(run({"bench", "--study", "nope", "--out", "x"}).code == 2);

  const auto dir = scratch("bench");
  {
    std::ofstream f(dir / "small.json");
    f << R"({"theorems": {"kernel_batch": 20000, "fbm_paths": 200, "fbm_grid": 64, "exp_draws": 2000,
             "exp_batch": 128, "perturbations": 20, "tradeoff_batch": 1024, "tradeoff_candidates": 1024},
            "fig4": {"sp": {"max_sweeps": 20, "max_polish_sweeps": 40}}})";
  }
  const Run th = run({"bench", "--study", "theorems", "--out", (dir / "th").string(), "--seed", "1", "--config",
                      (dir / "small.json").string()});
  REQUIRE(th.code == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "th" / "report.json"));
  CHECK(report["checks"].size() == 4);
  const auto manifest = nlohmann::json::parse(slurp(dir / "th" / "manifest.json"));
  CHECK(manifest["seed"] == 1);
  CHECK(manifest["seed_source"] == "flag");

  const Run f4 = run({"bench", "--study", "fig4", "--out", (dir / "f4").string(), "--seed", "2", "--config",
                      (dir / "small.json").string()});
  REQUIRE(f4.code == 0);
  const std::string csv = slurp(dir / "f4" / "fig4.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
  CHECK(std::filesystem::exists(dir / "f4" / "fig4_curves.csv"));

  {
    std::ofstream f(dir / "bad.json");
    f << R"({"fig4": {"bogus": 1}})";
  }
  CHECK(run({"bench", "--study", "fig4", "--out", (dir / "bad").string(), "--config", (dir / "bad.json").string()})
            .code != 0);
}

TEST_CASE("functions listing") {
  const Run r = run({"functions"});
  CHECK(r.code == 0);
  CHECK(r.out.find("wingweight\t10") != std::string::npos);
  CHECK(run({}).code == 2);
}

}  // TEST_SUITE
