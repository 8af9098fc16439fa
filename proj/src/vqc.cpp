#include "hqml/vqc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "hqml/error.hpp"
#include "hqml/rng.hpp"

namespace hqml {

namespace {

constexpr double kClip = 1e-9;

double parity_plus_probability(const StateVector& s, Shots shots, std::uint64_t seed) {
  if (shots.is_exact()) {
    double p = 0.0;
    for (Eigen::Index i = 0; i < s.dim(); ++i)
      if (parity_of_index(static_cast<std::uint64_t>(i)) == 1) p += std::norm(s[i]);
    return std::clamp(p, 0.0, 1.0);
  }
  const auto counts = sample_counts(s, shots.count, seed);
  std::int64_t plus = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (parity_of_index(i) == 1) plus += counts[i];
  return static_cast<double>(plus) / static_cast<double>(shots.count);
}

void check_labels(const Labels& y) {
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 1 && y[i] != -1) throw ArgumentError("labels must be +1 or -1");
}

// Embedded training states are independent of theta, so they are prepared once.
class CachedEvaluator {
 public:
  CachedEvaluator(const Eigen::MatrixXd& scaled, const FeatureMapConfig& fm, int layers)
      : fm_(fm), layers_(layers) {
    states_.reserve(static_cast<std::size_t>(scaled.rows()));
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) states_.push_back(embed(scaled.row(i).transpose(), fm));
  }

  Eigen::VectorXd probabilities(const Eigen::VectorXd& theta, Shots shots, std::uint64_t seed,
                                std::initializer_list<std::uint64_t> tag) const {
    const auto w = build_variational_circuit(theta, fm_.n_qubits, layers_);
    Eigen::VectorXd p(static_cast<Eigen::Index>(states_.size()));
    for (std::size_t i = 0; i < states_.size(); ++i) {
      StateVector s = states_[i];
      s.apply(w);
      std::uint64_t sample_seed = 0;
      if (!shots.is_exact()) {
        sample_seed = derive_seed(seed, tag);
        sample_seed = derive_seed(sample_seed, {i});
      }
      p[static_cast<Eigen::Index>(i)] = parity_plus_probability(s, shots, sample_seed);
    }
    return p;
  }

 private:
  FeatureMapConfig fm_;
  int layers_;
  std::vector<StateVector> states_;
};

}  // namespace

int parity(std::string_view bits) {
  if (bits.empty()) throw ArgumentError("parity of an empty bitstring");
  int ones = 0;
  for (char c : bits) {
    if (c == '1') {
      ++ones;
    } else if (c != '0') {
      throw ArgumentError("bitstring may contain only 0 and 1");
    }
  }
  return ones % 2 == 0 ? 1 : -1;
}

Circuit build_variational_circuit(const Eigen::VectorXd& theta, int n_qubits, int layers) {
  check_qubit_count(n_qubits);
  if (layers < 0) throw ConfigError("layer count must be >= 0");
  if (theta.size() != ansatz_parameter_count(n_qubits, layers))
    throw ShapeError("ansatz with " + std::to_string(n_qubits) + " qubits and " + std::to_string(layers) +
                     " layers takes " + std::to_string(ansatz_parameter_count(n_qubits, layers)) +
                     " parameters, got " + std::to_string(theta.size()));
  Circuit c(n_qubits);
  for (int layer = 0; layer <= layers; ++layer) {
    for (int q = 0; q < n_qubits; ++q) c.add(GateOp::ry(q, theta[layer * n_qubits + q]));
    if (layer == layers) break;
    for (int q = 0; q + 1 < n_qubits; ++q) c.add(GateOp::cz(q, q + 1));
  }
  return c;
}

void VqcModel::validate() const {
  feature_map.validate();
  if (scaling.dim() != feature_map.n_qubits) throw ShapeError("scaling dimension differs from qubit count");
  if (theta.size() != ansatz_parameter_count(feature_map.n_qubits, layers))
    throw ShapeError("theta length does not match the ansatz");
}

void TrainConfig::validate() const {
  if (max_iters < 0) throw ConfigError("max_iters must be >= 0");
  if (!(a > 0.0) || !(c > 0.0)) throw ConfigError("SPSA gains a and c must be positive");
  if (shots.count < 0) throw ConfigError("shots must be >= 0 (0 = exact)");
}

double predict_proba(const VqcModel& model, const Eigen::VectorXd& x_raw, Shots shots, std::uint64_t seed) {
  model.validate();
  const auto x = scale_row(x_raw, model.scaling);
  StateVector s = embed(x, model.feature_map);
  s.apply(build_variational_circuit(model.theta, model.n_qubits(), model.layers));
  return parity_plus_probability(s, shots, seed);
}

int decide(double p_plus, double bias) { return p_plus - (1.0 - p_plus) + bias >= 0.0 ? 1 : -1; }

int classify(const VqcModel& model, const Eigen::VectorXd& x_raw, Shots shots, std::uint64_t seed) {
  return decide(predict_proba(model, x_raw, shots, seed), model.bias);
}

Labels classify(const VqcModel& model, const Eigen::MatrixXd& x_raw, Shots shots, std::uint64_t seed) {
  model.validate();
  const CachedEvaluator eval(scale_features(x_raw, model.scaling), model.feature_map, model.layers);
  const auto p = eval.probabilities(model.theta, shots, seed, {});
  Labels out(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = decide(p[i], model.bias);
  return out;
}

double binary_cross_entropy(const Eigen::VectorXd& p_plus, const Labels& y) {
  if (p_plus.size() == 0) throw ArgumentError("loss over an empty dataset");
  if (p_plus.size() != y.size()) throw ShapeError("prediction and label counts differ");
  check_labels(y);
  double total = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double p = std::clamp(p_plus[i], kClip, 1.0 - kClip);
    total -= std::log(y[i] == 1 ? p : 1.0 - p);
  }
  return total / static_cast<double>(y.size());
}

double loss(const VqcModel& model, const Dataset& data, Shots shots, std::uint64_t seed) {
  if (data.rows() == 0) throw ArgumentError("loss over an empty dataset");
  model.validate();
  const CachedEvaluator eval(scale_features(data.features, model.scaling), model.feature_map, model.layers);
  return binary_cross_entropy(eval.probabilities(model.theta, shots, seed, {}), data.labels);
}

double fit_bias(const Eigen::VectorXd& margins, const Labels& y) {
  if (margins.size() != y.size()) throw ShapeError("margin and label counts differ");
  // A sample is predicted +1 iff bias >= -margin, so accuracy is piecewise
  // constant between the breakpoints -margin_i.
  std::vector<double> cuts;
  for (Eigen::Index i = 0; i < margins.size(); ++i) cuts.push_back(std::clamp(-margins[i], -1.0, 1.0));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  auto correct = [&](double b) {
    Eigen::Index n = 0;
    for (Eigen::Index i = 0; i < y.size(); ++i) n += (decide(0.5 * (margins[i] + 1.0), b) == y[i]);
    return n;
  };

  // Candidate intervals [lo, hi); representative is the point nearest zero
  // strictly inside, or the midpoint.
  std::vector<std::pair<double, double>> intervals;
  double lo = -1.0;
  for (double c : cuts) {
    if (c > lo) intervals.emplace_back(lo, c);
    lo = c;
  }
  intervals.emplace_back(lo, 1.0);

  double best_bias = 0.0;
  Eigen::Index best_correct = -1;
  for (const auto& [a, b] : intervals) {
    double rep = 0.5 * (a + b);
    if (a <= 0.0 && 0.0 < b) rep = 0.0;
    if (a == b) rep = a;
    const auto n = correct(rep);
    if (n > best_correct || (n == best_correct && std::abs(rep) < std::abs(best_bias))) {
      best_correct = n;
      best_bias = rep;
    }
  }
  return best_bias;
}

VqcModel train_vqc(const Dataset& data, const FeatureMapConfig& fm, int layers, const TrainConfig& cfg,
                   TrainHistory* history) {
  if (data.rows() == 0) throw ArgumentError("cannot train on an empty dataset");
  data.validate();
  check_labels(data.labels);
  cfg.validate();
  fm.validate();
  if (fm.n_qubits != data.dim())
    throw ShapeError("data has " + std::to_string(data.dim()) + " features but the feature map has " +
                     std::to_string(fm.n_qubits) + " qubits");
  if (layers < 0) throw ConfigError("layer count must be >= 0");

  VqcModel model;
  model.feature_map = fm;
  model.layers = layers;
  model.scaling = fit_scaling(data.features);
  model.theta = Eigen::VectorXd::Zero(ansatz_parameter_count(fm.n_qubits, layers));
  if (cfg.random_init) {
    Rng init(derive_seed(cfg.seed, {0x1417}));
    for (Eigen::Index i = 0; i < model.theta.size(); ++i)
      model.theta[i] = std::numbers::pi * (2.0 * init.uniform() - 1.0);
  }

  const CachedEvaluator eval(scale_features(data.features, model.scaling), fm, layers);
  auto loss_at = [&](const Eigen::VectorXd& theta, std::uint64_t iter, std::uint64_t which) {
    return binary_cross_entropy(eval.probabilities(theta, cfg.shots, cfg.seed, {iter, which}), data.labels);
  };

  Rng perturb(derive_seed(cfg.seed, {0x5F5A}));
  Eigen::VectorXd theta = model.theta;
  Eigen::VectorXd best_theta = theta;
  double best = loss_at(theta, 0, 0);
  int best_iter = 0;
  std::vector<double> trace{best};

  Eigen::VectorXd delta(theta.size());
  for (int k = 0; k < cfg.max_iters; ++k) {
    const double ak = cfg.a / std::pow(k + 1.0, cfg.alpha);
    const double ck = cfg.c / std::pow(k + 1.0, cfg.gamma);
    for (Eigen::Index i = 0; i < delta.size(); ++i) delta[i] = perturb.sign();
    const auto iter = static_cast<std::uint64_t>(k) + 1;
    const double plus = loss_at(theta + ck * delta, iter, 1);
    const double minus = loss_at(theta - ck * delta, iter, 2);
    // delta_i is +-1, so 1/delta_i == delta_i
    theta -= ak * ((plus - minus) / (2.0 * ck)) * delta;

    const double now = loss_at(theta, iter, 0);
    trace.push_back(now);
    if (now < best) {
      best = now;
      best_theta = theta;
      best_iter = k + 1;
    }
  }
  model.theta = best_theta;

  const auto p = eval.probabilities(model.theta, cfg.shots, cfg.seed, {0xB1A5});
  const Eigen::VectorXd margins = 2.0 * p.array() - 1.0;
  model.bias = fit_bias(margins, data.labels);

  if (history) {
    history->loss = std::move(trace);
    history->best_loss = best;
    history->best_iteration = best_iter;
    Eigen::Index right = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) right += (decide(p[i], model.bias) == data.labels[i]);
    history->train_accuracy = static_cast<double>(right) / static_cast<double>(p.size());
  }
  return model;
}

}  // namespace hqml
