#include <doctest.h>

#include <algorithm>

#include "driftrules/cart.hpp"

using namespace driftrules;

namespace {

struct Data {
  Matrix x;
  std::vector<int> y;
};

Data make_data(std::uint64_t seed, std::size_t n, std::size_t d) {
  Rng rng(seed);
  Data data{Matrix(n, d), std::vector<int>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < d; ++j) {
      data.x.at(i, j) = std::round(rng.normal() * 4) / 4;
      s += (j % 3 == 0 ? 1.0 : -0.5) * data.x.at(i, j);
    }
    data.y[i] = (s + 0.5 * rng.normal()) > 0 ? 1 : 0;
  }
  return data;
}

void check_structure(const DecisionTree& t, const TreeParams& p) {
  std::size_t internal = 0;
  for (const auto& node : t.nodes()) {
    CHECK(node.depth <= p.max_depth);
    if (node.is_leaf()) {
      CHECK(node.support() >= p.min_samples_leaf);
      const int majority = node.counts[1] > node.counts[0] ? 1 : 0;
      CHECK(node.predicted == majority);
    } else {
      ++internal;
      const auto& l = t.nodes()[static_cast<std::size_t>(node.left)];
      const auto& r = t.nodes()[static_cast<std::size_t>(node.right)];
      CHECK(l.counts[0] + r.counts[0] == node.counts[0]);
      CHECK(l.counts[1] + r.counts[1] == node.counts[1]);
      CHECK(l.depth == node.depth + 1);
    }
  }
  CHECK(t.n_leaves() == internal + 1);
}

}  // namespace

TEST_CASE("gini") {
  CHECK(gini(5, 0) == 0.0);
  CHECK(gini(2, 2) == doctest::Approx(0.5));
  CHECK(gini(1, 3) == doctest::Approx(0.375));
}

TEST_CASE("pure labels give a single leaf") {
  Matrix x(4, 1, {1, 2, 3, 4});
  const std::vector<int> y{0, 0, 0, 0};
  const auto t = train_tree(x, y, {6, 1, 52, FeatureSubsample::all});
  CHECK(t.nodes().size() == 1);
  CHECK(t.root().predicted == 0);
}

TEST_CASE("one-dimensional example splits at 2.5") {
  Matrix x(4, 1, {1, 2, 3, 4});
  const std::vector<int> y{0, 0, 1, 1};
  const auto t = train_tree(x, y, {6, 1, 52, FeatureSubsample::all});
  REQUIRE(t.nodes().size() == 3);
  CHECK(t.root().feature == 0);
  CHECK(t.root().threshold == 2.5);
  const double a = 2.0, b = 3.0, c = 2.5;
  CHECK(predict_tree(t, std::span<const double>(&a, 1)) == 0);
  CHECK(predict_tree(t, std::span<const double>(&b, 1)) == 1);
  CHECK(predict_tree(t, std::span<const double>(&c, 1)) == 0);
}

TEST_CASE("ties go to the lower feature") {
  Matrix x(4, 2, {1, 1, 2, 2, 3, 3, 4, 4});
  const std::vector<int> y{0, 0, 1, 1};
  const auto t = train_tree(x, y, {6, 1, 52, FeatureSubsample::all});
  CHECK(t.root().feature == 0);
}

TEST_CASE("ties go to the lower threshold") {
  Matrix x(4, 1, {1, 2, 3, 4});
  const std::vector<int> y{0, 1, 0, 1};
  const auto t = train_tree(x, y, {1, 1, 52, FeatureSubsample::all});
  // Thresholds 1.5 and 3.5 both reach weighted Gini 1/3.
  CHECK(t.root().threshold == 1.5);
}

TEST_CASE("leaf majority ties predict 0") {
  Matrix x(2, 1, {1, 1});
  const std::vector<int> y{0, 1};
  const auto t = train_tree(x, y, {6, 1, 52, FeatureSubsample::all});
  CHECK(t.nodes().size() == 1);
  CHECK(t.root().predicted == 0);
}

TEST_CASE("min_samples_leaf blocks small children") {
  Matrix x(4, 1, {1, 2, 3, 4});
  const std::vector<int> y{0, 0, 0, 1};
  const auto t = train_tree(x, y, {6, 2, 52, FeatureSubsample::all});
  for (const auto& n : t.nodes()) {
    if (n.is_leaf()) CHECK(n.support() >= 2);
  }
}

TEST_CASE("random trees respect depth, leaf size and counts") {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto d = make_data(s, 600, 6);
    const TreeParams p{6, 5, 52, FeatureSubsample::all};
    const auto t = train_tree(d.x, d.y, p);
    CHECK(t.depth() <= 6);
    check_structure(t, p);
  }
}

TEST_CASE("separable data is fit exactly") {
  Matrix x(6, 2, {0, 5, 1, 4, 2, 3, 10, 2, 11, 1, 12, 0});
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const auto t = train_tree(x, y, {1, 1, 52, FeatureSubsample::all});
  for (std::size_t i = 0; i < 6; ++i) CHECK(t.predict(x.row(i)) == y[i]);
}

TEST_CASE("tree json round trip") {
  const auto d = make_data(3, 300, 4);
  const auto t = train_tree(d.x, d.y, {4, 3, 52, FeatureSubsample::all});
  const auto back = DecisionTree::from_json(t.to_json());
  CHECK(back.to_json() == t.to_json());
  for (std::size_t i = 0; i < d.x.rows(); ++i) CHECK(back.predict(d.x.row(i)) == t.predict(d.x.row(i)));
}

TEST_CASE("sqrt feature subsampling is seeded") {
  const auto d = make_data(4, 400, 9);
  const TreeParams p{6, 2, 9, FeatureSubsample::sqrt};
  CHECK(train_tree(d.x, d.y, p).to_json() == train_tree(d.x, d.y, p).to_json());
}

TEST_CASE("forest: reproducible and averages leaf fractions") {
  const auto d = make_data(5, 300, 5);
  ForestParams fp;
  fp.n_trees = 1;
  const auto f1 = train_forest(d.x, d.y, fp, 11);
  const auto f2 = train_forest(d.x, d.y, fp, 11);
  CHECK(f1.trees[0].to_json() == f2.trees[0].to_json());
  CHECK(predict_proba_forest(f1, d.x.row(0)) == f1.trees[0].predict_proba(d.x.row(0)));

  TreeNode a;
  a.counts = {8, 2};
  TreeNode b;
  b.counts = {2, 3};
  b.predicted = 1;
  Forest manual;
  manual.trees = {DecisionTree({a}, 1), DecisionTree({b}, 1)};
  const double v = 0.0;
  CHECK(predict_proba_forest(manual, std::span<const double>(&v, 1)) == doctest::Approx(0.4));

  TreeNode pure;
  pure.counts = {0, 7};
  pure.predicted = 1;
  Forest all_one;
  all_one.trees = {DecisionTree({pure}, 1), DecisionTree({pure}, 1)};
  CHECK(predict_proba_forest(all_one, std::span<const double>(&v, 1)) == 1.0);
}

TEST_CASE("invalid params are rejected") {
  Matrix x(2, 1, {1, 2});
  const std::vector<int> y{0, 1};
  CHECK_THROWS_AS(train_tree(x, y, {0, 1, 52, FeatureSubsample::all}), Error);
  CHECK_THROWS_AS(train_tree(x, y, {3, 0, 52, FeatureSubsample::all}), Error);
  const std::vector<int> bad{0, 2};
  CHECK_THROWS_AS(train_tree(x, bad, {3, 1, 52, FeatureSubsample::all}), Error);
}
