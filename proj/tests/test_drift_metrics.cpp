#include <doctest.h>

#include <cmath>
#include <numbers>

#include "driftrules/drift_metrics.hpp"

using namespace driftrules;

namespace {

Rule rule(std::vector<Condition> c, int predicted) {
  Rule r;
  r.conditions = std::move(c);
  r.predicted = predicted;
  return r;
}

Ruleset ruleset(std::vector<Rule> rules, std::size_t d = 1) {
  Ruleset rs;
  rs.rules = std::move(rules);
  rs.n_features = d;
  return rs;
}

Ruleset split_at(double t, int left = 0, int right = 1) {
  return ruleset({rule({{0, Op::le, t}}, left), rule({{0, Op::gt, t}}, right)});
}

Matrix column(std::vector<double> v) {
  const auto n = v.size();
  return Matrix(n, 1, std::move(v));
}

ImportanceVector iv(std::vector<double> w) { return {std::move(w), false}; }

}  // namespace

TEST_CASE("importance drift identity") {
  const auto v = iv({0.5, 0.3, 0.2});
  const auto d = importance_drift(v, v);
  CHECK(d.cosine == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.pearson == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.l1 == 0.0);
  CHECK(d.l2 == 0.0);
}

TEST_CASE("importance drift orthogonal one-hots") {
  const auto d = importance_drift(iv({1, 0}), iv({0, 1}));
  CHECK(d.cosine == 0.0);
  CHECK(d.pearson == doctest::Approx(-1.0));
  CHECK(d.l1 == doctest::Approx(2.0));
  CHECK(d.l2 == doctest::Approx(std::numbers::sqrt2));
}

TEST_CASE("importance drift worked example") {
  const auto d = importance_drift(iv({0.75, 0.25}), iv({0.25, 0.75}));
  CHECK(d.cosine == doctest::Approx(0.6));
  CHECK(d.pearson == doctest::Approx(-1.0));
  CHECK(d.l1 == doctest::Approx(1.0));
  CHECK(d.l2 == doctest::Approx(0.7071).epsilon(1e-4));
}

TEST_CASE("importance drift preconditions") {
  CHECK_THROWS_AS(importance_drift(iv({1, 0}), iv({1, 0, 0})), Error);
  CHECK_THROWS_AS(importance_drift(iv({1}), iv({1})), Error);
  ImportanceVector deg{{0, 0}, true};
  CHECK_THROWS_AS(importance_drift(deg, iv({1, 0})), Error);
  const auto flat = importance_drift(iv({0.5, 0.5}), iv({0.9, 0.1}));
  CHECK(flat.pearson_degenerate);
  CHECK(flat.pearson == 0.0);
}

TEST_CASE("pearson") {
  const std::vector<double> a{1, 2, 3}, b{2, 4, 6}, c{3, 2, 1}, k{1, 1, 1};
  CHECK(*pearson(a, b) == doctest::Approx(1.0));
  CHECK(*pearson(a, c) == doctest::Approx(-1.0));
  CHECK_FALSE(pearson(a, k).has_value());
}

TEST_CASE("prediction agreement") {
  const auto x = column({1, 3, 4, 5});
  CHECK(prediction_agreement(split_at(2.5), split_at(2.5), x) == 1.0);
  CHECK(prediction_agreement(ruleset({rule({}, 0)}), ruleset({rule({}, 1)}), x) == 0.0);
  CHECK(prediction_agreement(split_at(2.5), split_at(3.5), x) == 0.75);
}

TEST_CASE("coverage mean diff") {
  const auto x = column({0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(coverage_mean_diff(split_at(2.5), x, split_at(2.5), x) == 0.0);
  const auto four = ruleset({rule({{0, Op::le, 1.5}}, 0), rule({{0, Op::gt, 1.5}, {0, Op::le, 3.5}}, 1),
                             rule({{0, Op::gt, 3.5}, {0, Op::le, 5.5}}, 0), rule({{0, Op::gt, 5.5}}, 1)});
  CHECK(coverage_mean_diff(split_at(2.5), x, four, column({9, 9, 9})) == doctest::Approx(-0.25));
  CHECK(coverage_mean_diff(ruleset({rule({}, 0)}), x, ruleset({rule({}, 1)}), x) == 0.0);
}

TEST_CASE("activation stability") {
  const auto x = column({0, 1, 2, 3});
  CHECK(activation_stability(split_at(2.5), x, x) == doctest::Approx(1.0));
  CHECK(activation_stability(split_at(2.5), column({0, 1}), column({5, 6})) == 0.0);
  const auto prev = column({0, 5});
  const auto curr = column({0, 0, 0, 0, 0, 0, 0, 0, 0, 5});
  const double expected = (0.5 * 0.9 + 0.5 * 0.1) / (std::sqrt(0.5) * std::sqrt(0.82));
  CHECK(activation_stability(split_at(2.5), prev, curr) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.781).epsilon(1e-3));
}

TEST_CASE("jaccard cover") {
  const auto x = column({0, 1, 2, 3});
  CHECK(jaccard_cover(split_at(1.5), split_at(1.5), x) == 1.0);
  const auto prev = split_at(1.5, 1, 0);
  const auto curr = ruleset({rule({{0, Op::le, 0.5}}, 0), rule({{0, Op::gt, 0.5}, {0, Op::le, 2.5}}, 1),
                             rule({{0, Op::gt, 2.5}}, 0)});
  CHECK(jaccard_cover(prev, curr, x) == doctest::Approx(1.0 / 3.0));
  CHECK(jaccard_cover(split_at(1.5, 1, 0), split_at(1.5, 0, 1), x) == 0.0);
  CHECK(jaccard_cover(ruleset({rule({}, 0)}), ruleset({rule({}, 0)}), x) == 1.0);
}

TEST_CASE("compute drift marks single-leaf rulesets") {
  const auto x = column({0, 1, 2, 3});
  const auto leaf = ruleset({rule({}, 1)});
  const auto m = compute_drift(leaf, feature_importance(leaf), split_at(1.5), feature_importance(split_at(1.5)), x, x, x);
  CHECK(m.degenerate);
  CHECK_FALSE(m.feature_l1.has_value());
  CHECK(m.prediction_agreement == 0.5);
}
