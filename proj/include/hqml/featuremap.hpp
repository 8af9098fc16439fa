#pragma once

#include <map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "hqml/statevector.hpp"

namespace hqml {

/// A scaled feature vector; entries lie in [0, 2 pi].
using FeatureVector = Eigen::VectorXd;

/// Column-wise min/max recorded on training data.
struct ScalingParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;

  Eigen::Index dim() const { return min.size(); }
};

struct FeatureMapConfig {
  int n_qubits = 1;
  int repetitions = 2;
  std::vector<std::pair<int, int>> entangler_pairs;

  /// All pairs (i < j, lexicographic) for n <= 4, nearest-neighbour chain above.
  static FeatureMapConfig with_defaults(int n_qubits, int repetitions = 2);

  void validate() const;
};

ScalingParams fit_scaling(const Eigen::MatrixXd& raw);

/// Rows of `raw` mapped column-wise to 2 pi (x - min) / (max - min), clamped
/// to [0, 2 pi]. Zero-width columns map to pi.
Eigen::MatrixXd scale_features(const Eigen::MatrixXd& raw, const ScalingParams& params);
FeatureVector scale_row(const Eigen::VectorXd& raw, const ScalingParams& params);

/// phi_{i}(x) = x_i and phi_{i,j}(x) = (pi - x_i)(pi - x_j).
double pair_phase(double xi, double xj);

/// Phase for every singleton and every configured pair, keyed by the sorted
/// subset of qubit indices.
std::map<std::vector<int>, double> phase_functions(const FeatureVector& x,
                                                   const std::vector<std::pair<int, int>>& pairs);

/// U_Phi(x) emitted `repetitions` times as: H on every qubit, ZPhase(x_i) on
/// each qubit in index order, ZZPhase(phi_ij) on each entangler pair in
/// configured order.
Circuit build_feature_map_circuit(const FeatureVector& x, const FeatureMapConfig& cfg);

/// U_Phi(x)|0...0>.
StateVector embed(const FeatureVector& x, const FeatureMapConfig& cfg);

}  // namespace hqml
