#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "driftrules/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = driftrules::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(DRIFTRULES_TEST_TMP) / "cli" / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("synth writes dataset and truth deterministically") {
  const auto a = scratch("synth_a");
  const auto b = scratch("synth_b");
  const std::vector<std::string> flags{"--windows", "12", "--kind", "sudden", "--seed", "7", "--samples", "20"};
  auto args = std::vector<std::string>{"synth", "--out", a.string()};
  args.insert(args.end(), flags.begin(), flags.end());
  REQUIRE(cli(args).code == 0);
  CHECK(fs::exists(a / "dataset.csv"));
  CHECK(fs::exists(a / "truth.json"));
  args[2] = b.string();
  REQUIRE(cli(args).code == 0);
  CHECK(slurp(a / "dataset.csv") == slurp(b / "dataset.csv"));
  CHECK(slurp(a / "truth.json") == slurp(b / "truth.json"));
}

TEST_CASE("synth into an unwritable location fails") {
  const auto dir = scratch("blocked");
  fs::create_directories(dir);
  std::ofstream(dir / "file") << "x";
  const auto r = cli({"synth", "--out", (dir / "file" / "sub").string()});
  CHECK(r.code != 0);
  CHECK_FALSE(r.err.empty());
}

TEST_CASE("bad arguments fail") {
  CHECK(cli({}).code != 0);
  CHECK(cli({"synth"}).code != 0);
  CHECK(cli({"synth", "--out", scratch("k").string(), "--kind", "wobble"}).code != 0);
  CHECK(cli({"frobnicate"}).code != 0);
}

TEST_CASE("run, replay and report") {
  const auto data = scratch("run_data");
  REQUIRE(cli({"synth", "--out", data.string(), "--families", "6", "--samples", "40", "--window-days", "60",
               "--windows", "8", "--seed", "3"})
              .code == 0);
  const auto out = scratch("run_out");
  const auto r = cli({"run", "--set", "data.path=" + (data / "dataset.csv").string(), "--set",
                      "experiment.scenario=fvf", "--set", "tree.min_samples_leaf=2", "--set", "forest.n_trees=5",
                      "--out", out.string()});
  INFO(r.err);
  REQUIRE(r.code == 0);
  for (const auto* f : {"transitions.csv", "correlations.csv", "summary.json", "rulesets"}) CHECK(fs::exists(out / f));
  CHECK(fs::exists(out / "rulesets" / "fam0_vs_fam5" / "windows.csv"));
  CHECK(fs::exists(out / "rulesets" / "fam0_vs_fam5" / "window_0.txt"));

  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["config"]["experiment.scenario"] == "fvf");
  CHECK(summary["aggregate"].size() == 80);
  CHECK(summary["metadata"].contains("elapsed_seconds"));

  const auto replay = scratch("run_replay");
  REQUIRE(cli({"run", "--config", (out / "summary.json").string(), "--out", replay.string()}).code == 0);
  CHECK(slurp(out / "transitions.csv") == slurp(replay / "transitions.csv"));
  CHECK(slurp(out / "correlations.csv") == slurp(replay / "correlations.csv"));

  const auto full = cli({"report", "--in", out.string()});
  REQUIRE(full.code == 0);
  CHECK(count_lines(full.out) == 81);
  const auto top = cli({"report", "--in", out.string(), "--top", "5"});
  REQUIRE(top.code == 0);
  CHECK(count_lines(top.out) == 6);
  CHECK(fs::exists(out / "plot.csv"));
}

TEST_CASE("run with a missing dataset writes nothing") {
  const auto out = scratch("missing_out");
  const auto r = cli({"run", "--set", "data.path=/nonexistent/data.csv", "--out", out.string()});
  CHECK(r.code != 0);
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("run reports every configuration error at once") {
  const auto r = cli({"run", "--set", "window.length_days=x", "--set", "nope.key=1", "--set", "tree.max_depth=0",
                      "--set", "novalue", "--out", scratch("bad").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("window.length_days") != std::string::npos);
  CHECK(r.err.find("nope.key") != std::string::npos);
  CHECK(r.err.find("tree.max_depth") != std::string::npos);
  CHECK(r.err.find("novalue") != std::string::npos);
  CHECK(r.err.find("data.path") != std::string::npos);
}

TEST_CASE("run rejects families absent from the data") {
  const auto data = scratch("fam_data");
  REQUIRE(cli({"synth", "--out", data.string(), "--samples", "20"}).code == 0);
  const auto r = cli({"run", "--set", "data.path=" + (data / "dataset.csv").string(), "--set",
                      "experiment.families=ghost", "--out", scratch("fam_out").string()});
  CHECK(r.code != 0);
  CHECK(r.err.find("ghost") != std::string::npos);
}

TEST_CASE("report rejects a malformed summary") {
  const auto dir = scratch("bad_summary");
  fs::create_directories(dir);
  std::ofstream(dir / "summary.json") << "{ not json";
  CHECK(cli({"report", "--in", dir.string()}).code != 0);
  std::ofstream(dir / "summary.json", std::ios::trunc) << R"({"aggregate": [{"metric": 1}]})";
  CHECK(cli({"report", "--in", dir.string()}).code != 0);
  CHECK(cli({"report", "--in", (dir / "missing").string()}).code != 0);
}
