#include "driftrules/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace driftrules {

namespace {

const std::map<std::string, std::string>& default_values() {
  static const std::map<std::string, std::string> values = {
      {"data.path", ""},
      {"data.min_ts", ""},
      {"data.max_ts", ""},
      {"data.dedup", "true"},
      {"select.k", "0"},
      {"experiment.scenario", "fvb"},
      {"experiment.families", ""},
      {"experiment.pairs", ""},
      {"experiment.lags", "0,1"},
      {"experiment.population", "next_window_concat"},
      {"experiment.seed", "52"},
      {"experiment.medoid_sample_cap", "2000"},
      {"window.mode", "fixed"},
      {"window.length_days", "60"},
      {"window.split_fraction", "0.8"},
      {"window.eps_days", "4"},
      {"window.min_samples", "500"},
      {"window.k", "4"},
      {"window.cluster_scope", "pair"},
      {"tree.max_depth", "6"},
      {"tree.min_samples_leaf", "5"},
      {"tree.seed", "52"},
      {"forest.n_trees", "25"},
      {"forest.max_depth", "8"},
      {"forest.min_samples_leaf", "1"},
      {"forest.holdout_fraction", "0.3"},
      {"forest.min_population", "20"},
      {"output.dir", "out"},
  };
  return values;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text, std::vector<std::string>& errors, T fallback) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    errors.push_back(key + ": cannot parse '" + text + "'");
    return fallback;
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text, std::vector<std::string>& errors) {
  if (text == "true" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "0" || text == "no") return false;
  errors.push_back(key + ": expected true/false, found '" + text + "'");
  return false;
}

}  // namespace

ConfigMap ConfigMap::defaults() {
  ConfigMap m;
  m.values_ = default_values();
  return m;
}

ConfigMap ConfigMap::parse(const std::string& text, std::vector<std::string>& errors) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(line_no) + ": expected 'section.key = value'");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto before = errors.size();
    m.set(key, trim(line.substr(eq + 1)), errors);
    if (errors.size() > before) errors.back() = "line " + std::to_string(line_no) + ": " + errors.back();
  }
  return m;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path, std::vector<std::string>& errors) {
  std::ifstream in(path);
  if (!in) {
    errors.push_back("cannot open config " + path.string());
    return {};
  }
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    try {
      return from_summary(nlohmann::json::parse(buf.str()), errors);
    } catch (const nlohmann::json::exception& e) {
      errors.push_back(path.string() + ": " + e.what());
      return {};
    }
  }
  return parse(buf.str(), errors);
}

ConfigMap ConfigMap::from_summary(const nlohmann::json& summary, std::vector<std::string>& errors) {
  ConfigMap m;
  const auto it = summary.find("config");
  if (it == summary.end() || !it->is_object()) {
    errors.push_back("summary has no 'config' object");
    return m;
  }
  for (const auto& [key, value] : it->items()) {
    if (!value.is_string()) {
      errors.push_back(key + ": expected a string value");
      continue;
    }
    m.set(key, value.get<std::string>(), errors);
  }
  return m;
}

void ConfigMap::set(const std::string& key, const std::string& value, std::vector<std::string>& errors) {
  if (!default_values().contains(key)) {
    errors.push_back("unknown config key '" + key + "'");
    return;
  }
  values_[key] = value;
}

const std::string& ConfigMap::get(const std::string& key) const {
  if (const auto it = values_.find(key); it != values_.end()) return it->second;
  if (const auto it = default_values().find(key); it != default_values().end()) return it->second;
  throw Error("unknown config key '" + key + "'");
}

ConfigMap ConfigMap::resolved_with(const ConfigMap& overrides) const {
  ConfigMap out = *this;
  for (const auto& [k, v] : overrides.values_) out.values_[k] = v;
  return out;
}

nlohmann::json ConfigMap::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : values_) j[k] = v;
  return j;
}

ExperimentConfig to_experiment_config(const ConfigMap& map, std::vector<std::string>& errors) {
  ExperimentConfig c;
  const auto& scenario = map.get("experiment.scenario");
  if (scenario == "fvb") {
    c.scenario = Scenario::fvb;
  } else if (scenario == "fvf") {
    c.scenario = Scenario::fvf;
  } else {
    errors.push_back("experiment.scenario: expected fvb or fvf, found '" + scenario + "'");
  }
  c.families = split_list(map.get("experiment.families"));
  for (const auto& p : split_list(map.get("experiment.pairs"))) {
    const auto colon = p.find(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == p.size()) {
      errors.push_back("experiment.pairs: expected 'positive:negative', found '" + p + "'");
      continue;
    }
    c.pairs.push_back({p.substr(0, colon), p.substr(colon + 1)});
  }
  c.lags.clear();
  for (const auto& l : split_list(map.get("experiment.lags"))) {
    c.lags.push_back(parse_number<int>("experiment.lags", l, errors, 0));
  }
  const auto& population = map.get("experiment.population");
  if (population == "next_window_concat") {
    c.population = PopulationMode::next_window_concat;
  } else if (population == "current_window_concat") {
    c.population = PopulationMode::current_window_concat;
  } else {
    errors.push_back("experiment.population: expected next_window_concat or current_window_concat");
  }
  c.seed = parse_number<std::uint64_t>("experiment.seed", map.get("experiment.seed"), errors, 52);
  c.medoid_sample_cap = parse_number<std::size_t>("experiment.medoid_sample_cap",
                                                  map.get("experiment.medoid_sample_cap"), errors, 2000);
  c.select_k = parse_number<std::size_t>("select.k", map.get("select.k"), errors, 0);

  const auto& mode = map.get("window.mode");
  if (mode == "fixed") {
    c.windowing.mode = WindowMode::fixed;
  } else if (mode == "dbscan") {
    c.windowing.mode = WindowMode::dbscan;
  } else if (mode == "kmeans") {
    c.windowing.mode = WindowMode::kmeans;
  } else {
    errors.push_back("window.mode: expected fixed, dbscan or kmeans, found '" + mode + "'");
  }
  c.windowing.length_days = parse_number<double>("window.length_days", map.get("window.length_days"), errors, 60.0);
  c.windowing.split_fraction =
      parse_number<double>("window.split_fraction", map.get("window.split_fraction"), errors, 0.8);
  c.windowing.cluster.eps_days = parse_number<double>("window.eps_days", map.get("window.eps_days"), errors, 4.0);
  c.windowing.cluster.min_samples =
      parse_number<std::size_t>("window.min_samples", map.get("window.min_samples"), errors, 500);
  c.windowing.cluster.k = parse_number<std::size_t>("window.k", map.get("window.k"), errors, 4);
  const auto& scope = map.get("window.cluster_scope");
  if (scope == "pair") {
    c.windowing.scope = ClusterScope::pair;
  } else if (scope == "family") {
    c.windowing.scope = ClusterScope::family;
  } else {
    errors.push_back("window.cluster_scope: expected pair or family, found '" + scope + "'");
  }

  c.tree.max_depth = parse_number<int>("tree.max_depth", map.get("tree.max_depth"), errors, 6);
  c.tree.min_samples_leaf =
      parse_number<std::size_t>("tree.min_samples_leaf", map.get("tree.min_samples_leaf"), errors, 5);
  c.tree.seed = parse_number<std::uint64_t>("tree.seed", map.get("tree.seed"), errors, 52);

  c.domain.forest.n_trees = parse_number<std::size_t>("forest.n_trees", map.get("forest.n_trees"), errors, 25);
  c.domain.forest.tree.max_depth = parse_number<int>("forest.max_depth", map.get("forest.max_depth"), errors, 8);
  c.domain.forest.tree.min_samples_leaf =
      parse_number<std::size_t>("forest.min_samples_leaf", map.get("forest.min_samples_leaf"), errors, 1);
  c.domain.forest.tree.feature_subsample = FeatureSubsample::sqrt;
  c.domain.holdout_fraction =
      parse_number<double>("forest.holdout_fraction", map.get("forest.holdout_fraction"), errors, 0.3);
  c.domain.min_population =
      parse_number<std::size_t>("forest.min_population", map.get("forest.min_population"), errors, 20);

  for (auto& e : c.validation_errors()) errors.push_back(std::move(e));
  return c;
}

DataConfig to_data_config(const ConfigMap& map, std::vector<std::string>& errors) {
  DataConfig d;
  d.path = map.get("data.path");
  if (d.path.empty()) errors.push_back("data.path is required");
  if (const auto& v = map.get("data.min_ts"); !v.empty()) {
    d.min_ts = parse_number<std::int64_t>("data.min_ts", v, errors, 0);
  }
  if (const auto& v = map.get("data.max_ts"); !v.empty()) {
    d.max_ts = parse_number<std::int64_t>("data.max_ts", v, errors, 0);
  }
  if (d.min_ts && d.max_ts && *d.min_ts > *d.max_ts) errors.push_back("data.min_ts exceeds data.max_ts");
  d.dedup = parse_bool("data.dedup", map.get("data.dedup"), errors);
  d.output_dir = map.get("output.dir");
  if (d.output_dir.empty()) errors.push_back("output.dir is required");
  return d;
}

}  // namespace driftrules
