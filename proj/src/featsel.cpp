#include "hqml/featsel.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "hqml/error.hpp"

namespace hqml {

namespace {

// Gains closer than this are treated as ties.
constexpr double kGainTolerance = 1e-12;

double gini_from_counts(Eigen::Index pos, Eigen::Index total) {
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

double split_point(double lo, double hi) {
  const double mid = lo + 0.5 * (hi - lo);
  return mid < hi ? mid : lo;
}

void check_inputs(const Eigen::MatrixXd& x, const Labels& y) {
  if (x.rows() == 0 || x.cols() == 0) throw ArgumentError("cannot train on empty data");
  if (x.rows() != y.size()) throw ShapeError("row count differs from label count");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 1 && y[i] != -1) throw ArgumentError("labels must be +1 or -1");
}

std::vector<Eigen::Index> sorted_by(const Eigen::MatrixXd& x, std::vector<Eigen::Index> idx, Eigen::Index f) {
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return x(a, f) < x(b, f); });
  return idx;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, const Labels& y, DecisionTree& tree) : x_(x), y_(y), tree_(tree) {}

  int build(const std::vector<Eigen::Index>& idx, int depth) {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::Index pos = 0;
    for (auto i : idx) pos += (y_[i] == 1);

    TreeNode node;
    node.samples = n;
    node.impurity = gini_from_counts(pos, n);
    node.label = (2 * pos >= n) ? 1 : -1;
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    if (depth >= tree_.max_depth || pos == 0 || pos == n) return id;
    const Split best = best_split(idx, node.impurity);
    if (best.feature < 0) return id;

    std::vector<Eigen::Index> left, right;
    for (auto i : idx) (x_(i, best.feature) <= best.threshold ? left : right).push_back(i);
    const int l = build(left, depth + 1);
    const int r = build(right, depth + 1);
    auto& self = tree_.nodes[static_cast<std::size_t>(id)];
    self.feature = best.feature;
    self.threshold = best.threshold;
    self.gain = best.gain;
    self.left = l;
    self.right = r;
    return id;
  }

 private:
  Split best_split(const std::vector<Eigen::Index>& idx, double parent) const {
    const auto n = static_cast<Eigen::Index>(idx.size());
    Eigen::Index total_pos = 0;
    for (auto i : idx) total_pos += (y_[i] == 1);

    Split best;
    for (Eigen::Index f = 0; f < x_.cols(); ++f) {
      const auto order = sorted_by(x_, idx, f);
      Eigen::Index left_pos = 0;
      for (Eigen::Index p = 0; p + 1 < n; ++p) {
        left_pos += (y_[order[static_cast<std::size_t>(p)]] == 1);
        const double a = x_(order[static_cast<std::size_t>(p)], f);
        const double b = x_(order[static_cast<std::size_t>(p + 1)], f);
        if (!(a < b)) continue;
        const Eigen::Index nl = p + 1, nr = n - nl;
        const double gain = parent - (static_cast<double>(nl) / n) * gini_from_counts(left_pos, nl) -
                            (static_cast<double>(nr) / n) * gini_from_counts(total_pos - left_pos, nr);
        if (gain > best.gain + kGainTolerance) best = {static_cast<int>(f), split_point(a, b), gain};
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Labels& y_;
  DecisionTree& tree_;
};

ImportanceReport normalized(Eigen::VectorXd raw) {
  const double total = raw.sum();
  if (total > 0.0) raw /= total;
  return {std::move(raw)};
}

}  // namespace

double gini_impurity(std::span<const int> labels) {
  if (labels.empty()) throw ArgumentError("Gini impurity of an empty label set");
  Eigen::Index pos = 0;
  for (int v : labels) {
    if (v != 1 && v != -1) throw ArgumentError("labels must be +1 or -1");
    pos += (v == 1);
  }
  return gini_from_counts(pos, static_cast<Eigen::Index>(labels.size()));
}

double gini_impurity(const Labels& labels) {
  return gini_impurity(std::span<const int>(labels.data(), static_cast<std::size_t>(labels.size())));
}

int DecisionTree::predict(const Eigen::VectorXd& x) const {
  if (x.size() != n_features) throw ShapeError("row dimension differs from the tree's training data");
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf())
    node = &nodes[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left : node->right)];
  return node->label;
}

Labels DecisionTree::predict(const Eigen::MatrixXd& x) const {
  Labels out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(Eigen::VectorXd(x.row(i).transpose()));
  return out;
}

int DecisionTree::depth() const {
  std::vector<int> d(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes[i].is_leaf()) {
      d[static_cast<std::size_t>(nodes[i].left)] = d[i] + 1;
      d[static_cast<std::size_t>(nodes[i].right)] = d[i] + 1;
    }
  }
  return deepest;
}

DecisionTree train_tree(const Eigen::MatrixXd& x, const Labels& y, int max_depth) {
  check_inputs(x, y);
  if (max_depth < 0) throw ConfigError("max_depth must be >= 0");
  DecisionTree tree;
  tree.max_depth = max_depth;
  tree.n_features = x.cols();
  std::vector<Eigen::Index> all(static_cast<std::size_t>(x.rows()));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  TreeBuilder(x, y, tree).build(all, 0);
  return tree;
}

ImportanceReport tree_importance(const DecisionTree& tree, Eigen::Index n_train) {
  if (n_train <= 0) throw ArgumentError("n_train must be positive");
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(tree.n_features);
  for (const auto& node : tree.nodes)
    if (!node.is_leaf()) raw[node.feature] += static_cast<double>(node.samples) / static_cast<double>(n_train) * node.gain;
  return normalized(std::move(raw));
}

ImportanceReport boosted_importance(const Eigen::MatrixXd& x, const Labels& y, int rounds, double learning_rate) {
  check_inputs(x, y);
  if (rounds < 1) throw ArgumentError("boosting needs at least one round");
  if (!(learning_rate > 0.0)) throw ArgumentError("learning rate must be positive");

  const auto n = x.rows();
  const Eigen::VectorXd target = y.cast<double>();
  Eigen::VectorXd fitted = Eigen::VectorXd::Constant(n, target.mean());
  Eigen::VectorXd raw = Eigen::VectorXd::Zero(x.cols());
  std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  std::vector<std::vector<Eigen::Index>> orders;
  for (Eigen::Index f = 0; f < x.cols(); ++f) orders.push_back(sorted_by(x, all, f));

  for (int round = 0; round < rounds; ++round) {
    const Eigen::VectorXd residual = target - fitted;
    const double total = residual.sum();
    const double base = total * total / static_cast<double>(n);

    Split best;
    double best_left = 0.0, best_right = 0.0;
    for (Eigen::Index f = 0; f < x.cols(); ++f) {
      const auto& order = orders[static_cast<std::size_t>(f)];
      double left_sum = 0.0;
      for (Eigen::Index p = 0; p + 1 < n; ++p) {
        left_sum += residual[order[static_cast<std::size_t>(p)]];
        const double a = x(order[static_cast<std::size_t>(p)], f);
        const double b = x(order[static_cast<std::size_t>(p + 1)], f);
        if (!(a < b)) continue;
        const double nl = static_cast<double>(p + 1), nr = static_cast<double>(n - p - 1);
        const double right_sum = total - left_sum;
        const double gain = left_sum * left_sum / nl + right_sum * right_sum / nr - base;
        if (gain > best.gain + kGainTolerance) {
          best = {static_cast<int>(f), split_point(a, b), gain};
          best_left = left_sum / nl;
          best_right = right_sum / nr;
        }
      }
    }
    // A constant stump leaves zero-mean residuals unchanged.
    if (best.feature < 0) break;
    raw[best.feature] += best.gain;
    for (Eigen::Index i = 0; i < n; ++i)
      fitted[i] += learning_rate * (x(i, best.feature) <= best.threshold ? best_left : best_right);
  }
  return normalized(std::move(raw));
}

std::vector<int> select_top_k(const ImportanceReport& report, int k) {
  const auto d = report.size();
  if (k < 1 || k > d)
    throw ArgumentError("k = " + std::to_string(k) + " outside [1, " + std::to_string(d) + "]");
  std::vector<int> idx(static_cast<std::size_t>(d));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return report.scores[a] > report.scores[b]; });
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

}  // namespace hqml
