#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "modeloc/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "modeloc_cli_tests";

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + MODELOC_CLI + "\" " + args + " > \"" +
                          (kWork / "stdout.txt").string() + "\" 2> \"" + (kWork / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string path(const std::string& name) { return "\"" + (kWork / name).string() + "\""; }

}  // namespace

TEST_CASE("simulate then locate from the command line") {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  REQUIRE(run("simulate --buses 10 --seed 17 --offset 0.01 --out " + path("event.csv") + " --truth " +
              path("truth.json")) == 0);
  const auto truth = nlohmann::json::parse(slurp(kWork / "truth.json"));
  const std::string source = truth.at("source_channel");

  REQUIRE(run("locate --input " + path("event.csv") +
              " --forced-window 120:240 --ringdown-window 240:280 --band 0.1:1.5 --report " +
              path("report.json") + " --plot " + path("compass.svg")) == 0);
  const auto report = nlohmann::json::parse(slurp(kWork / "report.json"));
  CHECK(modeloc::validate_report_json(report).empty());
  CHECK(report.at("schema_version") == "v1");
  CHECK(report.at("ranking").at(0).at("channel") == source);
  CHECK(report.at("verdict").at("kind") == "SingleSource");
  CHECK(report.at("verdict").at("channels").at(0) == source);
  CHECK(slurp(kWork / "stdout.txt").rfind("SingleSource " + source, 0) == 0);

  const std::string svg = slurp(kWork / "compass.svg");
  CHECK(svg.find("<line class=\"arrow forced highlight\" data-channel=\"" + source + "\"") !=
        std::string::npos);

  // Baseline path using the natural shape from the previous report.
  CHECK(run("locate --input " + path("event.csv") + " --forced-window 120:240 --baseline " +
            path("report.json") + " --band 0.1:1.5 --report " + path("report_base.json")) == 0);
  const auto base = nlohmann::json::parse(slurp(kWork / "report_base.json"));
  CHECK(base.at("natural_origin") == "baseline");
}

TEST_CASE("command-line input errors exit with status 2") {
  fs::create_directories(kWork);
  CHECK(run("locate --input " + path("missing.csv") +
            " --forced-window 0:10 --ringdown-window 10:20 --band 0.1:1 --report " + path("r.json")) == 2);
  CHECK(slurp(kWork / "stderr.txt").find("missing.csv") != std::string::npos);
  {
    std::ofstream bad(kWork / "bad.csv");
    bad << "t,A\n0,1\n0.1,nan\n";
  }
  CHECK(run("locate --input " + path("bad.csv") +
            " --forced-window 0:10 --ringdown-window 10:20 --band 0.1:1 --report " + path("r.json")) == 2);
  CHECK(slurp(kWork / "stderr.txt").find(":3:") != std::string::npos);
  CHECK(run("locate --input " + path("bad.csv") + " --forced-window 0:10 --band 0.1:1 --report " +
            path("r.json")) == 2);
  CHECK(run("locate --input x --forced-window 0:1 --ringdown-window 1:2 --baseline y --band 0.1:1 --report z") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("simulate --buses 2 --seed 1 --offset 0 --out a --truth b") == 2);
}

TEST_CASE("sweep writes per-trial reports and a summary") {
  fs::create_directories(kWork);
  REQUIRE(run("sweep --trials 3 --seed 9 --out " + path("sweep")) == 0);
  const auto summary = nlohmann::json::parse(slurp(kWork / "sweep" / "summary.json"));
  CHECK(summary.at("trials") == 3);
  CHECK(summary.at("results").size() == 3);
  for (int i = 0; i < 3; ++i) {
    const auto r = modeloc::read_json(kWork / "sweep" / ("trial_000" + std::to_string(i) + ".json"));
    CHECK(modeloc::validate_report_json(r).empty());
  }
}
