#include <doctest.h>

#include "driftrules/config.hpp"

using namespace driftrules;

TEST_CASE("defaults resolve to a valid config") {
  std::vector<std::string> errors;
  const auto c = to_experiment_config(ConfigMap::defaults(), errors);
  CHECK(errors.empty());
  CHECK(c.windowing.length_days == 60.0);
  CHECK(c.lags == std::vector<int>{0, 1});
  CHECK(c.tree.max_depth == 6);
  CHECK(c.tree.min_samples_leaf == 5);
  CHECK(c.domain.forest.n_trees == 25);
  CHECK(c.domain.holdout_fraction == 0.3);
  const auto d = to_data_config(ConfigMap::defaults(), errors);
  CHECK(errors.size() == 1);
  CHECK(errors[0].find("data.path") != std::string::npos);
  CHECK(d.dedup);
}

TEST_CASE("parse collects every problem with line numbers") {
  std::vector<std::string> errors;
  const auto m = ConfigMap::parse(
      "# comment\n"
      "window.length_days = 30\n"
      "bogus.key = 1\n"
      "no equals sign\n"
      "experiment.scenario = fvf   # trailing\n",
      errors);
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].rfind("line 3:", 0) == 0);
  CHECK(errors[0].find("bogus.key") != std::string::npos);
  CHECK(errors[1].rfind("line 4:", 0) == 0);
  CHECK(m.get("window.length_days") == "30");
  CHECK(m.get("experiment.scenario") == "fvf");
}

TEST_CASE("typed conversion reports each bad value") {
  std::vector<std::string> errors;
  ConfigMap m;
  m.set("window.length_days", "abc", errors);
  m.set("experiment.scenario", "fvx", errors);
  m.set("experiment.lags", "0,3", errors);
  m.set("data.dedup", "maybe", errors);
  m.set("data.path", "x.csv", errors);
  m.set("experiment.pairs", "a:b,c", errors);
  REQUIRE(errors.empty());
  const auto resolved = ConfigMap::defaults().resolved_with(m);
  to_experiment_config(resolved, errors);
  to_data_config(resolved, errors);
  CHECK(errors.size() == 6);
}

TEST_CASE("pairs and family lists parse") {
  std::vector<std::string> errors;
  ConfigMap m = ConfigMap::defaults();
  m.set("experiment.scenario", "fvf", errors);
  m.set("experiment.pairs", "fam0:fam1, fam2:fam3", errors);
  m.set("experiment.families", "fam0,fam1", errors);
  const auto c = to_experiment_config(m, errors);
  CHECK(errors.empty());
  REQUIRE(c.pairs.size() == 2);
  CHECK(c.pairs[1] == FamilyPair{"fam2", "fam3"});
  CHECK(c.families.size() == 2);
}

TEST_CASE("summary echo replays") {
  std::vector<std::string> errors;
  ConfigMap m = ConfigMap::defaults();
  m.set("window.mode", "kmeans", errors);
  const nlohmann::json summary{{"config", m.to_json()}};
  const auto back = ConfigMap::from_summary(summary, errors);
  CHECK(errors.empty());
  CHECK(back.values() == m.values());
  ConfigMap::from_summary(nlohmann::json{{"nothing", 1}}, errors);
  CHECK(errors.size() == 1);
}
