#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

#include "hqml/dataset.hpp"
#include "hqml/featuremap.hpp"
#include "hqml/statevector.hpp"

namespace hqml {

/// Symmetric fidelity-kernel Gram matrix.
using KernelMatrix = Eigen::MatrixXd;

/// |<Phi(x)|Phi(y)>|^2. With shots, the estimate is the all-zeros frequency of
/// U_Phi(y)^dagger U_Phi(x)|0...0> (inversion test).
double kernel_entry(const FeatureVector& x, const FeatureVector& y, const FeatureMapConfig& cfg,
                    Shots shots = Shots::exact(), std::uint64_t seed = 0);

/// Gram matrix over the rows of `x` (scaled). Entries are evaluated for i <= j
/// and mirrored; in shot mode pair (i, j) uses derive_seed(seed, {i, j}).
/// The diagonal is pinned to 1 only in exact mode.
KernelMatrix kernel_matrix(const Eigen::MatrixXd& x, const FeatureMapConfig& cfg, Shots shots = Shots::exact(),
                           std::uint64_t seed = 0);

/// rows(query) x rows(train) kernel values, for prediction.
Eigen::MatrixXd cross_kernel(const Eigen::MatrixXd& query, const Eigen::MatrixXd& train,
                             const FeatureMapConfig& cfg, Shots shots = Shots::exact(), std::uint64_t seed = 0);

struct KernelDiagnostics {
  double max_asymmetry = 0.0;
  double max_diagonal_deviation = 0.0;
  double min_entry = 0.0;
  double max_entry = 0.0;
  double min_eigenvalue = 0.0;

  bool valid(double tol = 1e-10, double eig_tol = 1e-8) const {
    return max_asymmetry <= tol && max_diagonal_deviation <= tol && min_entry >= -tol &&
           max_entry <= 1.0 + tol && min_eigenvalue >= -eig_tol;
  }
};

KernelDiagnostics diagnose_kernel(const KernelMatrix& k);

struct SvmDualModel {
  Eigen::VectorXd alphas;
  double bias = 0.0;
  std::vector<Eigen::Index> support;
  Labels y;
  double c = 1.0;
  int iterations = 0;
};

struct DualSolverOptions {
  double tolerance = 1e-6;
  long max_iterations = 0;  // 0 -> 10^4 * M
};

/// SMO on the dual: each step updates the maximal-violating pair (i from I_up
/// maximising -y_i G_i, j from I_low minimising it) until the violation is
/// below tolerance. Bias is the mean of y_i - sum_j a_j y_j K_ij over free
/// support vectors, or the midpoint of the feasible interval if none are free.
SvmDualModel train_svm_dual(const KernelMatrix& k, const Labels& y, double c = 1.0,
                            const DualSolverOptions& opts = {});

/// sum a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij.
double dual_objective(const KernelMatrix& k, const Labels& y, const Eigen::VectorXd& alphas);

struct LsSvmModel {
  Eigen::VectorXd a;
  double bias = 0.0;
  double gamma = std::numeric_limits<double>::infinity();
  double residual = 0.0;
};

/// Solves [[0, 1^T], [1, K + I/gamma]] (b, a)^T = (0, y)^T by LU with partial
/// pivoting; gamma may be +infinity.
LsSvmModel train_ls_svm(const KernelMatrix& k, const Labels& y,
                        double gamma = std::numeric_limits<double>::infinity());

double decision_value(const SvmDualModel& m, const Eigen::VectorXd& k_row);
double decision_value(const LsSvmModel& m, const Eigen::VectorXd& k_row);

inline int sign_label(double v) { return v >= 0.0 ? 1 : -1; }

template <typename Model>
int predict_kernel(const Model& m, const Eigen::VectorXd& k_row) {
  return sign_label(decision_value(m, k_row));
}

/// Row-wise predictions for a query-by-train kernel block.
template <typename Model>
Labels predict_kernel_rows(const Model& m, const Eigen::MatrixXd& k_block) {
  Labels out(k_block.rows());
  for (Eigen::Index i = 0; i < k_block.rows(); ++i) out[i] = predict_kernel(m, k_block.row(i).transpose());
  return out;
}

}  // namespace hqml
