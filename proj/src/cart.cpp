#include "driftrules/cart.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftrules/kernels.hpp"

namespace driftrules {

void TreeParams::validate() const {
  if (max_depth < 1) throw Error("tree params: max_depth must be >= 1");
  if (min_samples_leaf < 1) throw Error("tree params: min_samples_leaf must be >= 1");
}

double TreeNode::positive_fraction() const {
  const auto n = support();
  return n == 0 ? 0.0 : static_cast<double>(counts[1]) / static_cast<double>(n);
}

double gini(std::size_t n0, std::size_t n1) {
  const std::size_t n = n0 + n1;
  if (n == 0) return 0.0;
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features)
    : nodes_(std::move(nodes)), n_features_(n_features) {
  if (nodes_.empty()) throw Error("decision tree needs at least one node");
}

std::size_t DecisionTree::n_leaves() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int DecisionTree::depth() const {
  int d = 0;
  for (const auto& n : nodes_) d = std::max(d, n.depth);
  return d;
}

std::size_t DecisionTree::leaf_index(std::span<const double> row) const {
  if (row.size() != n_features_) {
    throw Error("predict: row has " + std::to_string(row.size()) + " features, tree expects " +
                std::to_string(n_features_));
  }
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return i;
}

int DecisionTree::predict(std::span<const double> row) const { return nodes_[leaf_index(row)].predicted; }

double DecisionTree::predict_proba(std::span<const double> row) const {
  return nodes_[leaf_index(row)].positive_fraction();
}

nlohmann::json DecisionTree::to_json() const {
  nlohmann::json nodes = nlohmann::json::array();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    nlohmann::json j{{"id", i}, {"depth", n.depth}, {"counts", {n.counts[0], n.counts[1]}}};
    if (n.is_leaf()) {
      j["leaf"] = true;
      j["class"] = n.predicted;
    } else {
      j["leaf"] = false;
      j["feature"] = n.feature;
      j["threshold"] = n.threshold;
      j["left"] = n.left;
      j["right"] = n.right;
    }
    nodes.push_back(std::move(j));
  }
  return {{"n_features", n_features_}, {"nodes", std::move(nodes)}};
}

DecisionTree DecisionTree::from_json(const nlohmann::json& j) {
  std::vector<TreeNode> nodes;
  for (const auto& jn : j.at("nodes")) {
    TreeNode n;
    n.depth = jn.at("depth").get<int>();
    n.counts = {jn.at("counts").at(0).get<std::size_t>(), jn.at("counts").at(1).get<std::size_t>()};
    if (jn.at("leaf").get<bool>()) {
      n.predicted = jn.at("class").get<int>();
    } else {
      n.feature = jn.at("feature").get<int>();
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
      n.predicted = n.counts[1] > n.counts[0] ? 1 : 0;
    }
    nodes.push_back(n);
  }
  return DecisionTree(std::move(nodes), j.at("n_features").get<std::size_t>());
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const int> y, const TreeParams& params)
      : x_(x), y_(y), params_(params), rng_(params.seed) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    grow(std::move(rows), 0);
    return DecisionTree(std::move(nodes_), x_.cols());
  }

 private:
  std::vector<std::size_t> candidate_features() {
    std::vector<std::size_t> all(x_.cols());
    std::iota(all.begin(), all.end(), std::size_t{0});
    if (params_.feature_subsample == FeatureSubsample::all) return all;
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(x_.cols()))));
    for (std::size_t i = 0; i < m; ++i) std::swap(all[i], all[i + rng_.below(all.size() - i)]);
    all.resize(m);
    std::sort(all.begin(), all.end());
    return all;
  }

  int grow(std::vector<std::size_t> rows, int depth) {
    TreeNode node;
    node.depth = depth;
    for (const auto r : rows) ++node.counts[static_cast<std::size_t>(y_[r])];
    node.predicted = node.counts[1] > node.counts[0] ? 1 : 0;

    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    if (pure || depth >= params_.max_depth) return id;

    const auto features = candidate_features();
    const auto split = kernels::best_split(x_, y_, rows, features, params_.min_samples_leaf);
    if (!split.valid()) return id;

    std::vector<std::size_t> left, right;
    for (const auto r : rows) {
      (x_.at(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    const int l = grow(std::move(left), depth + 1);
    const int r = grow(std::move(right), depth + 1);
    auto& n = nodes_[static_cast<std::size_t>(id)];
    n.feature = split.feature;
    n.threshold = split.threshold;
    n.left = l;
    n.right = r;
    return id;
  }

  const Matrix& x_;
  std::span<const int> y_;
  TreeParams params_;
  Rng rng_;
  std::vector<TreeNode> nodes_;
};

void check_inputs(const Matrix& x, std::span<const int> y) {
  if (x.rows() == 0) throw Error("train_tree: empty input");
  if (x.rows() != y.size()) throw Error("train_tree: feature/label length mismatch");
  for (const int v : y) {
    if (v != 0 && v != 1) throw Error("train_tree: labels must be 0 or 1");
  }
}

}  // namespace

DecisionTree train_tree(const Matrix& features, std::span<const int> labels, const TreeParams& params) {
  check_inputs(features, labels);
  std::vector<std::size_t> rows(features.rows());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return train_tree_on_rows(features, labels, rows, params);
}

DecisionTree train_tree_on_rows(const Matrix& features, std::span<const int> labels,
                                std::span<const std::size_t> rows, const TreeParams& params) {
  params.validate();
  check_inputs(features, labels);
  if (rows.empty()) throw Error("train_tree: empty input");
  return TreeBuilder(features, labels, params).build({rows.begin(), rows.end()});
}

int predict_tree(const DecisionTree& tree, std::span<const double> row) { return tree.predict(row); }

Forest train_forest(const Matrix& features, std::span<const int> labels, const ForestParams& params,
                    std::uint64_t seed) {
  check_inputs(features, labels);
  if (features.rows() < 2) throw Error("train_forest: need at least 2 samples");
  const auto positives = std::count(labels.begin(), labels.end(), 1);
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(labels.size())) {
    throw Error("train_forest: both classes must be present");
  }
  if (params.n_trees < 1) throw Error("train_forest: n_trees must be >= 1");

  Forest forest;
  forest.trees.resize(params.n_trees);
  forest.seeds.resize(params.n_trees);
  const auto n = features.rows();
  const auto n_trees = static_cast<std::ptrdiff_t>(params.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    const std::uint64_t tree_seed = seed + static_cast<std::uint64_t>(t);
    Rng rng(tree_seed);
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = rng.below(n);
    TreeParams tp = params.tree;
    tp.seed = derive_seed(tree_seed, 1);
    forest.seeds[static_cast<std::size_t>(t)] = tree_seed;
    forest.trees[static_cast<std::size_t>(t)] = train_tree_on_rows(features, labels, sample, tp);
  }
  return forest;
}

double predict_proba_forest(const Forest& forest, std::span<const double> row) {
  if (forest.trees.empty()) throw Error("predict_proba_forest: empty forest");
  double sum = 0.0;
  for (const auto& t : forest.trees) sum += t.predict_proba(row);
  return sum / static_cast<double>(forest.trees.size());
}

}  // namespace driftrules
