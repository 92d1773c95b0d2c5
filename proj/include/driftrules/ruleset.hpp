#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftrules/cart.hpp"

namespace driftrules {

enum class Op { le, gt };

struct Condition {
  std::size_t feature = 0;
  Op op = Op::le;
  double threshold = 0.0;

  bool holds(std::span<const double> row) const {
    return op == Op::le ? row[feature] <= threshold : row[feature] > threshold;
  }
};

/// Conjunction of conditions, listed root-first. An empty rule matches
/// everything (it comes from a single-leaf tree).
struct Rule {
  std::vector<Condition> conditions;
  int predicted = 0;
  std::size_t leaf_id = 0;
  std::size_t support = 0;
};

/// The root-to-leaf paths of one tree. Rules partition the feature space.
struct Ruleset {
  std::vector<Rule> rules;
  std::size_t n_features = 0;
  std::size_t window = 0;

  std::size_t size() const { return rules.size(); }
};

struct ImportanceVector {
  std::vector<double> weights;
  /// Set when no rule has a condition (single-leaf tree); weights are all zero.
  bool degenerate = false;

  std::size_t size() const { return weights.size(); }
};

Ruleset extract_ruleset(const DecisionTree& tree, std::size_t window = 0);

bool rule_covers(const Rule& rule, std::span<const double> row);

double coverage(const Rule& rule, const Matrix& x);

/// Class of the unique covering rule; throws if zero or several rules match.
int ruleset_predict(const Ruleset& rs, std::span<const double> row);

/// Per-rule fraction of rows covered.
std::vector<double> activation_rates(const Ruleset& rs, const Matrix& x);

/// Per-row covering-rule index (first match). OpenMP over rows.
std::vector<std::size_t> covering_rules(const Ruleset& rs, const Matrix& x);

/// s_i = sum over rules of (#conditions on feature i) / |rule|, then
/// normalized to sum to one.
ImportanceVector feature_importance(const Ruleset& rs);

nlohmann::json ruleset_to_json(const Ruleset& rs);
Ruleset ruleset_from_json(const nlohmann::json& j);

/// `IF f0 <= 2.5 AND f1 > 0.1 THEN malware`, one rule per line.
std::string render_rule(const Rule& rule, const std::string& positive = "malware",
                        const std::string& negative = "benign");
std::string render_ruleset(const Ruleset& rs, const std::string& positive = "malware",
                           const std::string& negative = "benign");

namespace serial {

std::vector<double> activation_rates(const Ruleset& rs, const Matrix& x);

}  // namespace serial

}  // namespace driftrules
