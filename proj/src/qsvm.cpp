#include "hqml/qsvm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "hqml/error.hpp"
#include "hqml/rng.hpp"

namespace hqml {

namespace {

constexpr double kTau = 1e-12;

double all_zero_frequency(StateVector s, const Circuit& undo, Shots shots, std::uint64_t seed) {
  s.apply(undo);
  const auto counts = sample_counts(s, shots.count, seed);
  return static_cast<double>(counts[0]) / static_cast<double>(shots.count);
}

void check_square(const KernelMatrix& k, const Labels& y) {
  if (k.rows() != k.cols()) throw ShapeError("kernel matrix is not square");
  if (k.rows() != y.size()) throw ShapeError("kernel size differs from label count");
  if (k.rows() == 0) throw ArgumentError("empty kernel matrix");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] != 1 && y[i] != -1) throw ArgumentError("labels must be +1 or -1");
}

struct PreparedRows {
  std::vector<StateVector> states;
  std::vector<Circuit> inverses;  // only filled in shot mode
};

PreparedRows prepare(const Eigen::MatrixXd& x, const FeatureMapConfig& cfg, bool need_inverse) {
  PreparedRows out;
  out.states.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    auto circuit = build_feature_map_circuit(x.row(i).transpose(), cfg);
    StateVector s(cfg.n_qubits);
    s.apply(circuit);
    out.states.push_back(std::move(s));
    if (need_inverse) out.inverses.push_back(inverse(circuit));
  }
  return out;
}

double pair_value(const PreparedRows& a, std::size_t i, const PreparedRows& b, std::size_t j, Shots shots,
                  std::uint64_t seed) {
  if (shots.is_exact()) return std::norm(inner_product(a.states[i], b.states[j]));
  return all_zero_frequency(a.states[i], b.inverses[j], shots, derive_seed(seed, {i, j}));
}

}  // namespace

double kernel_entry(const FeatureVector& x, const FeatureVector& y, const FeatureMapConfig& cfg, Shots shots,
                    std::uint64_t seed) {
  if (x.size() != y.size()) throw ShapeError("kernel arguments differ in dimension");
  if (shots.count < 0) throw ArgumentError("shots must be >= 0 (0 = exact)");
  if (shots.is_exact()) return std::norm(inner_product(embed(x, cfg), embed(y, cfg)));
  return all_zero_frequency(embed(x, cfg), inverse(build_feature_map_circuit(y, cfg)), shots, seed);
}

KernelMatrix kernel_matrix(const Eigen::MatrixXd& x, const FeatureMapConfig& cfg, Shots shots, std::uint64_t seed) {
  if (x.rows() < 1) throw ArgumentError("kernel matrix needs at least one point");
  if (shots.count < 0) throw ArgumentError("shots must be >= 0 (0 = exact)");
  const auto rows = prepare(x, cfg, !shots.is_exact());
  const auto m = x.rows();
  KernelMatrix k(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i; j < m; ++j) {
      double v = 1.0;
      if (i != j || !shots.is_exact())
        v = pair_value(rows, static_cast<std::size_t>(i), rows, static_cast<std::size_t>(j), shots, seed);
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& query, const Eigen::MatrixXd& train, const FeatureMapConfig& cfg,
                             Shots shots, std::uint64_t seed) {
  if (query.cols() != train.cols()) throw ShapeError("query and training points differ in dimension");
  if (shots.count < 0) throw ArgumentError("shots must be >= 0 (0 = exact)");
  const auto q = prepare(query, cfg, false);
  const auto t = prepare(train, cfg, !shots.is_exact());
  Eigen::MatrixXd k(query.rows(), train.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      k(i, j) = pair_value(q, static_cast<std::size_t>(i), t, static_cast<std::size_t>(j), shots, seed);
  return k;
}

KernelDiagnostics diagnose_kernel(const KernelMatrix& k) {
  if (k.rows() != k.cols() || k.rows() == 0) throw ShapeError("kernel matrix must be square and nonempty");
  KernelDiagnostics d;
  d.max_asymmetry = (k - k.transpose()).cwiseAbs().maxCoeff();
  d.max_diagonal_deviation = (k.diagonal().array() - 1.0).abs().maxCoeff();
  d.min_entry = k.minCoeff();
  d.max_entry = k.maxCoeff();
  const Eigen::MatrixXd sym = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericError("eigenvalue computation failed");
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

double dual_objective(const KernelMatrix& k, const Labels& y, const Eigen::VectorXd& alphas) {
  const Eigen::VectorXd ay = alphas.cwiseProduct(y.cast<double>());
  return alphas.sum() - 0.5 * ay.dot(k * ay);
}

SvmDualModel train_svm_dual(const KernelMatrix& k, const Labels& y, double c, const DualSolverOptions& opts) {
  if (!(c > 0.0)) throw ConfigError("SVM box constraint C must be positive");
  check_square(k, y);
  const auto m = y.size();
  if ((y.array() == y[0]).all()) throw DegenerateProblemError("all training labels are identical");

  const Eigen::VectorXd yd = y.cast<double>();
  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m);
  // Gradient of 1/2 a^T Q a - e^T a with Q_ij = y_i y_j K_ij.
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(m, -1.0);

  auto in_up = [&](Eigen::Index t) { return (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0.0); };
  auto in_low = [&](Eigen::Index t) { return (y[t] == 1 && alpha[t] > 0.0) || (y[t] == -1 && alpha[t] < c); };

  const long cap = opts.max_iterations > 0 ? opts.max_iterations : 10000L * static_cast<long>(m);
  long iter = 0;
  for (;; ++iter) {
    Eigen::Index i = -1, j = -1;
    double g_max = -std::numeric_limits<double>::infinity();
    double g_min = std::numeric_limits<double>::infinity();
    for (Eigen::Index t = 0; t < m; ++t) {
      const double v = -yd[t] * grad[t];
      if (in_up(t) && v > g_max) { g_max = v; i = t; }
      if (in_low(t) && v < g_min) { g_min = v; j = t; }
    }
    if (i < 0 || j < 0 || g_max - g_min < opts.tolerance) break;
    if (iter >= cap) {
      std::ostringstream os;
      os << "SMO did not converge within " << cap << " iterations (KKT violation " << g_max - g_min << ")";
      throw NumericError(os.str());
    }

    const double old_i = alpha[i], old_j = alpha[j];
    double quad = k(i, i) + k(j, j) - 2.0 * k(i, j);
    if (quad <= 0.0) quad = kTau;
    if (y[i] != y[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    const double di = alpha[i] - old_i, dj = alpha[j] - old_j;
    for (Eigen::Index t = 0; t < m; ++t)
      grad[t] += yd[t] * (yd[i] * k(t, i) * di + yd[j] * k(t, j) * dj);
  }

  SvmDualModel model;
  model.alphas = alpha;
  model.y = y;
  model.c = c;
  model.iterations = static_cast<int>(iter);

  // y_t - sum_j a_j y_j K_tj = -y_t G_t; with no free vectors the bias is the
  // midpoint of the interval allowed by the bound vectors.
  double free_sum = 0.0;
  int n_free = 0;
  double ub = std::numeric_limits<double>::infinity(), lb = -std::numeric_limits<double>::infinity();
  for (Eigen::Index t = 0; t < m; ++t) {
    const double yg = yd[t] * grad[t];
    if (alpha[t] > 0.0 && alpha[t] < c) {
      free_sum -= yg;
      ++n_free;
    } else if ((alpha[t] >= c) == (y[t] == -1)) {
      ub = std::min(ub, yg);
    } else {
      lb = std::max(lb, yg);
    }
  }
  model.bias = n_free > 0 ? free_sum / n_free : -0.5 * (ub + lb);
  for (Eigen::Index t = 0; t < m; ++t)
    if (alpha[t] > 0.0) model.support.push_back(t);
  return model;
}

LsSvmModel train_ls_svm(const KernelMatrix& k, const Labels& y, double gamma) {
  if (!(gamma > 0.0)) throw ConfigError("LS-SVM gamma must be positive (or infinite)");
  check_square(k, y);
  const auto m = y.size();
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(m + 1, m + 1);
  f.block(0, 1, 1, m).setOnes();
  f.block(1, 0, m, 1).setOnes();
  f.block(1, 1, m, m) = k;
  f.block(1, 1, m, m).diagonal().array() += 1.0 / gamma;

  Eigen::VectorXd rhs(m + 1);
  rhs[0] = 0.0;
  rhs.tail(m) = y.cast<double>();

  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(f);
  const double rcond = lu.rcond();
  Eigen::VectorXd sol;
  if (rcond > 1e-14) sol = lu.solve(rhs);
  const double residual = sol.size() ? (f * sol - rhs).norm() : std::numeric_limits<double>::infinity();
  if (rcond <= 1e-14 || !sol.allFinite() || residual > 1e-8 * rhs.norm()) {
    std::ostringstream os;
    os << "LS-SVM system is singular or ill-conditioned (reciprocal condition estimate " << rcond
       << ", residual " << residual << ")";
    throw NumericError(os.str());
  }

  LsSvmModel model;
  model.bias = sol[0];
  model.a = sol.tail(m);
  model.gamma = gamma;
  model.residual = residual;
  return model;
}

double decision_value(const SvmDualModel& m, const Eigen::VectorXd& k_row) {
  if (k_row.size() != m.alphas.size()) throw ShapeError("kernel row length differs from training size");
  return m.alphas.cwiseProduct(m.y.cast<double>()).dot(k_row) + m.bias;
}

double decision_value(const LsSvmModel& m, const Eigen::VectorXd& k_row) {
  if (k_row.size() != m.a.size()) throw ShapeError("kernel row length differs from training size");
  return m.a.dot(k_row) + m.bias;
}

}  // namespace hqml
