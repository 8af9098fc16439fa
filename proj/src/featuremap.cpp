#include "hqml/featuremap.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace hqml {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kRangeSlack = 1e-12;

}  // namespace

FeatureMapConfig FeatureMapConfig::with_defaults(int n_qubits, int repetitions) {
  FeatureMapConfig cfg;
  cfg.n_qubits = n_qubits;
  cfg.repetitions = repetitions;
  if (n_qubits <= 4) {
    for (int i = 0; i < n_qubits; ++i)
      for (int j = i + 1; j < n_qubits; ++j) cfg.entangler_pairs.emplace_back(i, j);
  } else {
    for (int i = 0; i + 1 < n_qubits; ++i) cfg.entangler_pairs.emplace_back(i, i + 1);
  }
  return cfg;
}

void FeatureMapConfig::validate() const {
  check_qubit_count(n_qubits);
  if (repetitions < 1) throw ConfigError("feature map repetitions must be >= 1");
  std::set<std::pair<int, int>> seen;
  for (const auto& [i, j] : entangler_pairs) {
    if (i < 0 || j >= n_qubits || i >= j)
      throw IndexError("entangler pair (" + std::to_string(i) + ", " + std::to_string(j) +
                       ") invalid for " + std::to_string(n_qubits) + " qubits");
    if (!seen.emplace(i, j).second) throw ConfigError("duplicate entangler pair");
  }
}

ScalingParams fit_scaling(const Eigen::MatrixXd& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) throw ArgumentError("cannot fit scaling on an empty matrix");
  return {raw.colwise().minCoeff().transpose(), raw.colwise().maxCoeff().transpose()};
}

FeatureVector scale_row(const Eigen::VectorXd& raw, const ScalingParams& params) {
  if (raw.size() != params.dim())
    throw ShapeError("row has " + std::to_string(raw.size()) + " features, scaling expects " +
                     std::to_string(params.dim()));
  FeatureVector out(raw.size());
  for (Eigen::Index j = 0; j < raw.size(); ++j) {
    const double width = params.max[j] - params.min[j];
    if (width <= 0.0) {
      out[j] = std::numbers::pi;
    } else {
      out[j] = std::clamp(kTwoPi * (raw[j] - params.min[j]) / width, 0.0, kTwoPi);
    }
  }
  return out;
}

Eigen::MatrixXd scale_features(const Eigen::MatrixXd& raw, const ScalingParams& params) {
  if (raw.cols() != params.dim())
    throw ShapeError("matrix has " + std::to_string(raw.cols()) + " columns, scaling expects " +
                     std::to_string(params.dim()));
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i)
    out.row(i) = scale_row(raw.row(i).transpose(), params).transpose();
  return out;
}

double pair_phase(double xi, double xj) {
  return (std::numbers::pi - xi) * (std::numbers::pi - xj);
}

std::map<std::vector<int>, double> phase_functions(const FeatureVector& x,
                                                   const std::vector<std::pair<int, int>>& pairs) {
  std::map<std::vector<int>, double> out;
  for (Eigen::Index i = 0; i < x.size(); ++i) out[{static_cast<int>(i)}] = x[i];
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= x.size() || j >= x.size())
      throw IndexError("entangler pair outside feature vector");
    out[{std::min(i, j), std::max(i, j)}] = pair_phase(x[i], x[j]);
  }
  return out;
}

Circuit build_feature_map_circuit(const FeatureVector& x, const FeatureMapConfig& cfg) {
  cfg.validate();
  if (x.size() != cfg.n_qubits)
    throw ShapeError("feature vector has dimension " + std::to_string(x.size()) + ", feature map has " +
                     std::to_string(cfg.n_qubits) + " qubits");
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!std::isfinite(x[i]) || x[i] < -kRangeSlack || x[i] > kTwoPi + kRangeSlack)
      throw ArgumentError("feature " + std::to_string(i) + " outside [0, 2pi]; scale the data first");

  Circuit c(cfg.n_qubits);
  c.gates.reserve(static_cast<std::size_t>(cfg.repetitions) *
                  (2 * static_cast<std::size_t>(cfg.n_qubits) + cfg.entangler_pairs.size()));
  for (int r = 0; r < cfg.repetitions; ++r) {
    for (int q = 0; q < cfg.n_qubits; ++q) c.add(GateOp::h(q));
    for (int q = 0; q < cfg.n_qubits; ++q) c.add(GateOp::zphase(q, x[q]));
    for (const auto& [i, j] : cfg.entangler_pairs) c.add(GateOp::zzphase(i, j, pair_phase(x[i], x[j])));
  }
  return c;
}

StateVector embed(const FeatureVector& x, const FeatureMapConfig& cfg) {
  auto circuit = build_feature_map_circuit(x, cfg);
  StateVector s(cfg.n_qubits);
  s.apply(circuit);
  return s;
}

}  // namespace hqml
