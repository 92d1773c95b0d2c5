#include "driftrules/ruleset.hpp"

#include <numeric>
#include <sstream>

#include "driftrules/ingest.hpp"

namespace driftrules {

namespace {

constexpr std::uint64_t kMaxExactUnit = std::uint64_t{1} << 32;

void check_row(const Ruleset& rs, std::span<const double> row) {
  if (row.size() != rs.n_features) {
    throw Error("ruleset: row has " + std::to_string(row.size()) + " features, ruleset expects " +
                std::to_string(rs.n_features));
  }
}

void collect(const DecisionTree& tree, std::size_t node, std::vector<Condition>& path, Ruleset& out) {
  const auto& n = tree.nodes()[node];
  if (n.is_leaf()) {
    out.rules.push_back(Rule{path, n.predicted, node, n.support()});
    return;
  }
  const auto feature = static_cast<std::size_t>(n.feature);
  path.push_back({feature, Op::le, n.threshold});
  collect(tree, static_cast<std::size_t>(n.left), path, out);
  path.back().op = Op::gt;
  collect(tree, static_cast<std::size_t>(n.right), path, out);
  path.pop_back();
}

}  // namespace

Ruleset extract_ruleset(const DecisionTree& tree, std::size_t window) {
  Ruleset rs;
  rs.n_features = tree.n_features();
  rs.window = window;
  std::vector<Condition> path;
  collect(tree, 0, path, rs);
  return rs;
}

bool rule_covers(const Rule& rule, std::span<const double> row) {
  for (const auto& c : rule.conditions) {
    if (c.feature >= row.size()) throw Error("rule_covers: condition on feature " + std::to_string(c.feature) +
                                             " but row has " + std::to_string(row.size()));
    if (!c.holds(row)) return false;
  }
  return true;
}

double coverage(const Rule& rule, const Matrix& x) {
  if (x.rows() == 0) throw Error("coverage: empty population");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) hits += rule_covers(rule, x.row(i)) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(x.rows());
}

int ruleset_predict(const Ruleset& rs, std::span<const double> row) {
  check_row(rs, row);
  int predicted = -1;
  std::size_t matches = 0;
  for (const auto& r : rs.rules) {
    if (rule_covers(r, row)) {
      predicted = r.predicted;
      ++matches;
    }
  }
  if (matches != 1) {
    throw Error("ruleset_predict: " + std::to_string(matches) + " rules cover the row (corrupt ruleset)");
  }
  return predicted;
}

std::vector<std::size_t> covering_rules(const Ruleset& rs, const Matrix& x) {
  if (x.cols() != rs.n_features) throw Error("covering_rules: feature count mismatch");
  const auto n = static_cast<std::ptrdiff_t>(x.rows());
  std::vector<std::size_t> out(x.rows(), rs.rules.size());
#pragma omp parallel for schedule(static) if (x.rows() > 2048)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto row = x.row(static_cast<std::size_t>(i));
    for (std::size_t r = 0; r < rs.rules.size(); ++r) {
      if (rule_covers(rs.rules[r], row)) {
        out[static_cast<std::size_t>(i)] = r;
        break;
      }
    }
  }
  return out;
}

std::vector<double> activation_rates(const Ruleset& rs, const Matrix& x) {
  if (x.rows() == 0) throw Error("activation_rates: empty population");
  const auto hits = covering_rules(rs, x);
  std::vector<std::size_t> counts(rs.rules.size(), 0);
  for (const auto h : hits) {
    if (h < counts.size()) ++counts[h];
  }
  std::vector<double> rates(counts.size());
  for (std::size_t r = 0; r < counts.size(); ++r) {
    rates[r] = static_cast<double>(counts[r]) / static_cast<double>(x.rows());
  }
  return rates;
}

namespace serial {

std::vector<double> activation_rates(const Ruleset& rs, const Matrix& x) {
  if (x.rows() == 0) throw Error("activation_rates: empty population");
  std::vector<double> rates;
  rates.reserve(rs.rules.size());
  for (const auto& r : rs.rules) rates.push_back(coverage(r, x));
  return rates;
}

}  // namespace serial

ImportanceVector feature_importance(const Ruleset& rs) {
  if (rs.rules.empty()) throw Error("feature_importance: empty ruleset");
  ImportanceVector v;
  v.weights.assign(rs.n_features, 0.0);
  std::uint64_t unit = 1;
  for (const auto& rule : rs.rules) {
    for (const auto& c : rule.conditions) {
      if (c.feature >= rs.n_features) throw Error("feature_importance: condition feature out of range");
    }
    if (!rule.conditions.empty() && unit <= kMaxExactUnit) unit = std::lcm(unit, rule.conditions.size());
  }

  // s_i counted in units of 1/unit
  if (unit <= kMaxExactUnit) {
    std::vector<std::uint64_t> s(rs.n_features, 0);
    std::uint64_t total = 0;
    for (const auto& rule : rs.rules) {
      if (rule.conditions.empty()) continue;
      const std::uint64_t share = unit / rule.conditions.size();
      for (const auto& c : rule.conditions) s[c.feature] += share;
      total += share * rule.conditions.size();
    }
    if (total == 0) {
      v.degenerate = true;
      return v;
    }
    for (std::size_t i = 0; i < s.size(); ++i) v.weights[i] = static_cast<double>(s[i]) / static_cast<double>(total);
    return v;
  }

  for (const auto& rule : rs.rules) {
    const auto len = static_cast<double>(rule.conditions.size());
    for (const auto& c : rule.conditions) v.weights[c.feature] += 1.0 / len;
  }
  double total = 0.0;
  for (const double w : v.weights) total += w;
  for (auto& w : v.weights) w /= total;
  return v;
}

nlohmann::json ruleset_to_json(const Ruleset& rs) {
  nlohmann::json rules = nlohmann::json::array();
  for (const auto& r : rs.rules) {
    nlohmann::json conds = nlohmann::json::array();
    for (const auto& c : r.conditions) {
      conds.push_back({{"feature", c.feature}, {"op", c.op == Op::le ? "<=" : ">"}, {"threshold", c.threshold}});
    }
    rules.push_back({{"conditions", std::move(conds)},
                     {"class", r.predicted},
                     {"leaf_id", r.leaf_id},
                     {"support", r.support}});
  }
  return {{"n_features", rs.n_features}, {"window", rs.window}, {"rules", std::move(rules)}};
}

Ruleset ruleset_from_json(const nlohmann::json& j) {
  Ruleset rs;
  rs.n_features = j.at("n_features").get<std::size_t>();
  rs.window = j.value("window", std::size_t{0});
  for (const auto& jr : j.at("rules")) {
    Rule r;
    r.predicted = jr.at("class").get<int>();
    r.leaf_id = jr.value("leaf_id", std::size_t{0});
    r.support = jr.value("support", std::size_t{0});
    for (const auto& jc : jr.at("conditions")) {
      const auto op = jc.at("op").get<std::string>();
      if (op != "<=" && op != ">") throw Error("ruleset json: unknown operator '" + op + "'");
      r.conditions.push_back({jc.at("feature").get<std::size_t>(), op == "<=" ? Op::le : Op::gt,
                              jc.at("threshold").get<double>()});
    }
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

std::string render_rule(const Rule& rule, const std::string& positive, const std::string& negative) {
  std::ostringstream out;
  out << "IF ";
  if (rule.conditions.empty()) out << "TRUE";
  for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
    const auto& c = rule.conditions[i];
    if (i > 0) out << " AND ";
    out << 'f' << c.feature << (c.op == Op::le ? " <= " : " > ") << format_double(c.threshold);
  }
  out << " THEN " << (rule.predicted == 1 ? positive : negative);
  return out.str();
}

std::string render_ruleset(const Ruleset& rs, const std::string& positive, const std::string& negative) {
  std::string out;
  for (const auto& r : rs.rules) out += render_rule(r, positive, negative) + '\n';
  return out;
}

}  // namespace driftrules
