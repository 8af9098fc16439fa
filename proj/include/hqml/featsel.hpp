#pragma once

#include <limits>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "hqml/dataset.hpp"

namespace hqml {

inline constexpr int kUnlimitedDepth = std::numeric_limits<int>::max();

/// 1 - p(+1)^2 - p(-1)^2.
double gini_impurity(std::span<const int> labels);
double gini_impurity(const Labels& labels);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;   // x[feature] <= threshold
  int right = -1;
  int label = 1;   // majority label, +1 on ties
  Eigen::Index samples = 0;
  double impurity = 0.0;
  double gain = 0.0;  // impurity - weighted child impurity, splits only

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  int max_depth = 5;
  Eigen::Index n_features = 0;

  int predict(const Eigen::VectorXd& x) const;
  Labels predict(const Eigen::MatrixXd& x) const;
  int depth() const;
};

/// Greedy CART on Gini decrease over midpoints of sorted distinct values.
/// Ties go to the lowest feature index, then the lowest threshold. A node
/// becomes a leaf at max_depth, when pure, or when no split has positive gain.
DecisionTree train_tree(const Eigen::MatrixXd& x, const Labels& y, int max_depth = 5);

struct ImportanceReport {
  Eigen::VectorXd scores;  // sums to 1, or all zero when nothing split

  Eigen::Index size() const { return scores.size(); }
};

/// Per split: (node samples / n_train) * Gini decrease, summed per feature.
ImportanceReport tree_importance(const DecisionTree& tree, Eigen::Index n_train);

/// Squared-loss gradient boosting with depth-1 stumps; importance is the
/// per-feature sum of split gains (SSE reduction).
ImportanceReport boosted_importance(const Eigen::MatrixXd& x, const Labels& y, int rounds = 50,
                                    double learning_rate = 0.3);

/// k indices by descending score, ties by ascending index.
std::vector<int> select_top_k(const ImportanceReport& report, int k);

}  // namespace hqml
