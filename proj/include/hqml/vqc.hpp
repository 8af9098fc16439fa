#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "hqml/dataset.hpp"
#include "hqml/featuremap.hpp"
#include "hqml/statevector.hpp"

namespace hqml {

/// +1 for an even number of set bits, -1 for odd.
int parity(std::string_view bits);
inline int parity_of_index(std::uint64_t index) { return (std::popcount(index) % 2 == 0) ? 1 : -1; }

inline Eigen::Index ansatz_parameter_count(int n_qubits, int layers) {
  return static_cast<Eigen::Index>(n_qubits) * (layers + 1);
}

/// l repetitions of (RY(theta) on every qubit, then CZ(q, q+1) along the chain),
/// followed by a closing RY layer. theta is laid out layer-major:
/// theta[layer * n + qubit].
Circuit build_variational_circuit(const Eigen::VectorXd& theta, int n_qubits, int layers);

struct VqcModel {
  FeatureMapConfig feature_map;
  ScalingParams scaling;
  Eigen::VectorXd theta;
  int layers = 2;
  double bias = 0.0;

  int n_qubits() const { return feature_map.n_qubits; }
  void validate() const;
};

struct TrainConfig {
  int max_iters = 200;
  double a = 0.1;
  double c = 0.1;
  double alpha = 0.602;
  double gamma = 0.101;
  Shots shots = Shots::exact();
  std::uint64_t seed = 0;
  bool random_init = false;  // seed-controlled U(-pi, pi) start instead of zeros

  void validate() const;
};

/// P(parity = +1) of W(theta) U_Phi(x)|0...0>, exact or estimated from shots.
double predict_proba(const VqcModel& model, const Eigen::VectorXd& x_raw, Shots shots = Shots::exact(),
                     std::uint64_t seed = 0);

/// +1 when p - (1 - p) + bias >= 0, -1 otherwise.
int classify(const VqcModel& model, const Eigen::VectorXd& x_raw, Shots shots = Shots::exact(),
             std::uint64_t seed = 0);
Labels classify(const VqcModel& model, const Eigen::MatrixXd& x_raw, Shots shots = Shots::exact(),
                std::uint64_t seed = 0);

int decide(double p_plus, double bias);

/// Mean binary cross-entropy with p clipped to [1e-9, 1 - 1e-9].
double binary_cross_entropy(const Eigen::VectorXd& p_plus, const Labels& y);
double loss(const VqcModel& model, const Dataset& data, Shots shots = Shots::exact(), std::uint64_t seed = 0);

struct TrainHistory {
  std::vector<double> loss;  // loss at theta after each iteration (index 0 = initial theta)
  double best_loss = 0.0;
  int best_iteration = 0;
  double train_accuracy = 0.0;
};

VqcModel train_vqc(const Dataset& data, const FeatureMapConfig& fm, int layers, const TrainConfig& cfg,
                   TrainHistory* history = nullptr);

/// Bias in [-1, 1] maximising training accuracy for the given margins
/// 2p - 1; ties prefer the smallest |bias|.
double fit_bias(const Eigen::VectorXd& margins, const Labels& y);

}  // namespace hqml
