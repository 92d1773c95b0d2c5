#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftrules/experiment.hpp"

namespace driftrules {

/// Flat `section.key = value` configuration. Every key has a default, so a
/// resolved map names every setting and can be replayed as-is.
class ConfigMap {
 public:
  /// All known keys at their defaults.
  static ConfigMap defaults();

  /// Parses `section.key = value` lines; `#` starts a comment. Problems are
  /// appended to `errors` and parsing continues.
  static ConfigMap parse(const std::string& text, std::vector<std::string>& errors);
  static ConfigMap load(const std::filesystem::path& path, std::vector<std::string>& errors);
  /// Reads the `config` object echoed into a run's summary.json.
  static ConfigMap from_summary(const nlohmann::json& summary, std::vector<std::string>& errors);

  /// Sets a known key; unknown keys are reported.
  void set(const std::string& key, const std::string& value, std::vector<std::string>& errors);
  const std::string& get(const std::string& key) const;

  /// Defaults overlaid with `overrides`.
  ConfigMap resolved_with(const ConfigMap& overrides) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  nlohmann::json to_json() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Dataset-level settings that sit outside ExperimentConfig.
struct DataConfig {
  std::filesystem::path path;
  std::optional<std::int64_t> min_ts;
  std::optional<std::int64_t> max_ts;
  bool dedup = true;
  std::filesystem::path output_dir;
};

/// Typed view of a resolved map; every conversion problem goes to `errors`.
ExperimentConfig to_experiment_config(const ConfigMap& map, std::vector<std::string>& errors);
DataConfig to_data_config(const ConfigMap& map, std::vector<std::string>& errors);

}  // namespace driftrules
