#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "driftrules/common.hpp"

namespace driftrules {

enum class FeatureSubsample { all, sqrt };

struct TreeParams {
  int max_depth = 6;
  std::size_t min_samples_leaf = 5;
  std::uint64_t seed = 52;
  FeatureSubsample feature_subsample = FeatureSubsample::all;

  void validate() const;
};

/// Internal nodes send `value <= threshold` left. Leaves have feature == -1.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  int predicted = 0;
  std::array<std::size_t, 2> counts{};
  int depth = 0;

  bool is_leaf() const { return feature < 0; }
  std::size_t support() const { return counts[0] + counts[1]; }
  double positive_fraction() const;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features);

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  const TreeNode& root() const { return nodes_.front(); }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_leaves() const;
  int depth() const;

  /// Index of the leaf reached by `row`.
  std::size_t leaf_index(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  double predict_proba(std::span<const double> row) const;

  nlohmann::json to_json() const;
  static DecisionTree from_json(const nlohmann::json& j);

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_ = 0;
};

/// Gini impurity of a binary node with the given class counts.
double gini(std::size_t n0, std::size_t n1);

DecisionTree train_tree(const Matrix& features, std::span<const int> labels, const TreeParams& params);

/// Trains on a multiset of rows (duplicates allowed, as in a bootstrap).
DecisionTree train_tree_on_rows(const Matrix& features, std::span<const int> labels,
                                std::span<const std::size_t> rows, const TreeParams& params);

int predict_tree(const DecisionTree& tree, std::span<const double> row);

struct ForestParams {
  std::size_t n_trees = 25;
  TreeParams tree{8, 1, 52, FeatureSubsample::sqrt};
};

struct Forest {
  std::vector<DecisionTree> trees;
  std::vector<std::uint64_t> seeds;

  std::size_t n_trees() const { return trees.size(); }
};

/// Bagged trees; tree i uses seed + i for its bootstrap and feature draws.
Forest train_forest(const Matrix& features, std::span<const int> labels, const ForestParams& params,
                    std::uint64_t seed);

double predict_proba_forest(const Forest& forest, std::span<const double> row);

}  // namespace driftrules
