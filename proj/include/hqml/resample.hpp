#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "hqml/dataset.hpp"

namespace hqml {

enum class Provenance { Original, Synthetic };

struct LabeledSet {
  Eigen::MatrixXd rows;
  Labels labels;
  std::vector<Provenance> provenance;

  Eigen::Index size() const { return rows.rows(); }

  /// Every row flagged Original.
  static LabeledSet from(const Dataset& data);
  static LabeledSet from(Eigen::MatrixXd rows, Labels labels);
  Dataset to_dataset(std::vector<std::string> feature_names) const;
  std::vector<bool> synthetic_mask() const;
};

struct SyntheticRows {
  Eigen::MatrixXd rows;
  // (anchor, neighbour) row indices into the minority set each point came from
  std::vector<std::array<Eigen::Index, 2>> parents;
  bool uniform_fallback = false;  // ADASYN: no minority row had majority neighbours
};

/// Indices of the k nearest rows of `pool` to pool row `self` (Euclidean),
/// excluding `self`; distance ties go to the lower index.
std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& pool, Eigen::Index self, int k);

/// Each synthetic point is a + lambda (nb - a) with a a uniformly drawn
/// minority row, nb one of its min(k, m - 1) nearest minority neighbours and
/// lambda ~ U[0, 1).
SyntheticRows smote(const Eigen::MatrixXd& minority, int k, Eigen::Index n_synthetic, std::uint64_t seed);

/// Adaptive synthetic sampling: |maj| - |min| points allocated to minority
/// rows in proportion to the majority share of their k nearest neighbours in
/// the full set (largest-remainder rounding).
SyntheticRows adasyn(const Eigen::MatrixXd& rows, const Labels& labels, int k, std::uint64_t seed);

struct KMeansSelection {
  Eigen::MatrixXd rows;
  std::vector<Eigen::Index> kept;  // ascending indices into the input
};

/// k-means (k = target_count, k-means++ seeding, Lloyd to 1e-6 shift or 100
/// iterations) and, per cluster, the member nearest its centroid.
KMeansSelection kmeans_undersample(const Eigen::MatrixXd& majority, Eigen::Index target_count, std::uint64_t seed);

struct EnnResult {
  LabeledSet set;
  std::vector<Eigen::Index> kept;
};

/// Single-pass edited nearest neighbours: drops rows whose label disagrees with
/// the strict majority of their k nearest neighbours. Ties keep the row.
EnnResult enn_undersample(const LabeledSet& input, int k);

/// SMOTE the minority up to the majority count, then ENN on the union.
LabeledSet smote_enn(const LabeledSet& input, int smote_k, int enn_k, std::uint64_t seed);

/// Majority class reduced to the minority count by kmeans_undersample.
LabeledSet kmeans_balance(const LabeledSet& input, std::uint64_t seed);
/// Minority class grown to the majority count by SMOTE.
LabeledSet smote_balance(const LabeledSet& input, int k, std::uint64_t seed);
LabeledSet adasyn_balance(const LabeledSet& input, int k, std::uint64_t seed);

}  // namespace hqml
