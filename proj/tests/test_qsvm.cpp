#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "hqml/error.hpp"
#include "hqml/qsvm.hpp"
#include "oracle.hpp"

using namespace hqml;

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd random_points(Eigen::Index m, int d, Rng& rng) {
  Eigen::MatrixXd x(m, d);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() * 2 * kPi;
  return x;
}

Labels random_labels(Eigen::Index m, Rng& rng) {
  Labels y(m);
  for (Eigen::Index i = 0; i < m; ++i) y[i] = rng.sign();
  y[0] = 1;
  y[1] = -1;
  return y;
}

// Projected gradient ascent on the dual. The projection onto
// {0 <= a <= C, y.a = 0} is found by bisection on the multiplier of the
// equality constraint.
Eigen::VectorXd projected_gradient_dual(const Eigen::MatrixXd& k, const Labels& y, double c, int iters) {
  const Eigen::VectorXd yd = y.cast<double>();
  const Eigen::MatrixXd q = yd.asDiagonal() * k * yd.asDiagonal();
  const double step = 1.0 / Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(q).eigenvalues().maxCoeff();
  auto project = [&](const Eigen::VectorXd& v) {
    double lo = -1e3, hi = 1e3;
    Eigen::VectorXd a;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      a = (v - mid * yd).cwiseMax(0.0).cwiseMin(c);
      if (a.dot(yd) > 0) lo = mid; else hi = mid;
    }
    return a;
  };
  Eigen::VectorXd a = Eigen::VectorXd::Zero(y.size());
  for (int it = 0; it < iters; ++it) a = project(a + step * (Eigen::VectorXd::Ones(y.size()) - q * a));
  return a;
}

double primal_objective(const Eigen::MatrixXd& k, const Labels& y, const SvmDualModel& m) {
  const Eigen::VectorXd ay = m.alphas.cwiseProduct(y.cast<double>());
  double slack = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double f = k.row(i).dot(ay) + m.bias;
    slack += std::max(0.0, 1.0 - y[i] * f);
  }
  return 0.5 * ay.dot(k * ay) + m.c * slack;
}

}  // namespace

TEST_CASE("kernel entries") {
  const auto one = FeatureMapConfig::with_defaults(1);
  Eigen::VectorXd a(1), b(1);
  a << kPi / 2;
  b << 0.0;
  CHECK(std::abs(kernel_entry(a, b, one)) <= 1e-12);
  a << kPi / 4;
  CHECK(kernel_entry(a, b, one) == doctest::Approx(0.5).epsilon(1e-12));

  Rng rng(1);
  const auto three = FeatureMapConfig::with_defaults(3);
  const auto x = random_points(5, 3, rng);
  for (Eigen::Index i = 0; i < 5; ++i) {
    CHECK(kernel_entry(x.row(i).transpose(), x.row(i).transpose(), three) == doctest::Approx(1.0).epsilon(1e-12));
    const Eigen::VectorXcd si = oracle::feature_state(x.row(i).transpose(), 2, three.entangler_pairs);
    for (Eigen::Index j = 0; j < 5; ++j) {
      const Eigen::VectorXcd sj = oracle::feature_state(x.row(j).transpose(), 2, three.entangler_pairs);
      const double expect = std::norm(si.dot(sj));
      CHECK(std::abs(kernel_entry(x.row(i).transpose(), x.row(j).transpose(), three) - expect) <= 1e-12);
    }
  }
  CHECK_THROWS_AS(kernel_entry(Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(3), three), ShapeError);
}

TEST_CASE("shot kernel estimate") {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  const Eigen::Vector2d x(1.0, 2.5), y(1.3, 2.0);
  const double exact = kernel_entry(x, y, cfg);
  const double est = kernel_entry(x, y, cfg, Shots::of(1000), 7);
  CHECK(est == kernel_entry(x, y, cfg, Shots::of(1000), 7));
  CHECK(est * 1000 == std::round(est * 1000));
  CHECK(std::abs(est - exact) < 0.1);
  // identical points: the inversion test returns all zeros every shot
  CHECK(kernel_entry(x, x, cfg, Shots::of(100), 3) == doctest::Approx(1.0).epsilon(1e-12));

  double prev = 1.0;
  for (std::int64_t r : {100, 1000, 10000}) {
    double err = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) err += std::abs(kernel_entry(x, y, cfg, Shots::of(r), s) - exact);
    err /= 20.0;
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev <= 0.02);
}

TEST_CASE("kernel matrices") {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  Rng rng(2);
  CHECK(kernel_matrix(random_points(1, 2, rng), cfg) == Eigen::MatrixXd::Ones(1, 1));

  for (int trial = 0; trial < 5; ++trial) {
    const auto x = random_points(6, 2, rng);
    const auto k = kernel_matrix(x, cfg);
    CHECK(k == k.transpose());
    CHECK(k.diagonal() == Eigen::VectorXd::Ones(6));
    const auto d = diagnose_kernel(k);
    CHECK(d.valid());
    CHECK(d.min_eigenvalue >= -1e-8);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff() >= -1e-8);
    for (Eigen::Index i = 0; i < 6; ++i)
      for (Eigen::Index j = 0; j < 6; ++j)
        if (i != j) CHECK(k(i, j) == kernel_entry(x.row(i).transpose(), x.row(j).transpose(), cfg));
  }

  SUBCASE("shot mode") {
    const auto x = random_points(4, 2, rng);
    const auto k = kernel_matrix(x, cfg, Shots::of(200), 9);
    CHECK(k == k.transpose());
    CHECK(k == kernel_matrix(x, cfg, Shots::of(200), 9));
    CHECK(k(0, 1) == kernel_entry(x.row(0).transpose(), x.row(1).transpose(), cfg, Shots::of(200), derive_seed(9, {0, 1})));
  }
  SUBCASE("cross kernel") {
    const auto train = random_points(4, 2, rng);
    const auto query = random_points(3, 2, rng);
    const auto c = cross_kernel(query, train, cfg);
    CHECK(c.rows() == 3);
    CHECK(c.cols() == 4);
    CHECK(c(2, 1) == kernel_entry(query.row(2).transpose(), train.row(1).transpose(), cfg));
    CHECK_THROWS_AS(cross_kernel(Eigen::MatrixXd::Zero(1, 3), train, cfg), ShapeError);
  }
  SUBCASE("diagnostics flag a bad matrix") {
    Eigen::MatrixXd bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_FALSE(diagnose_kernel(bad).valid());
  }
}

TEST_CASE("dual SVM by hand") {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(2, 2);
  Labels y(2);
  y << 1, -1;
  const auto m = train_svm_dual(k, y, 10.0);
  CHECK(std::abs(m.alphas[0] - 1.0) <= 1e-8);
  CHECK(std::abs(m.alphas[1] - 1.0) <= 1e-8);
  CHECK(std::abs(m.bias) <= 1e-8);
  CHECK(predict_kernel(m, Eigen::Vector2d(1, 0)) == 1);
  CHECK(predict_kernel(m, Eigen::Vector2d(0, 1)) == -1);
  CHECK(predict_kernel(m, Eigen::Vector2d(0.5, 0.5)) == 1);  // decision value 0
  CHECK_THROWS_AS(predict_kernel(m, Eigen::Vector3d(0, 1, 0)), ShapeError);

  CHECK_THROWS_AS(train_svm_dual(k, y, 0.0), ConfigError);
  CHECK_THROWS_AS(train_svm_dual(k, y, -1.0), ConfigError);
  Labels same(2);
  same << 1, 1;
  CHECK_THROWS_AS(train_svm_dual(k, same, 1.0), DegenerateProblemError);
  CHECK_THROWS_AS(train_svm_dual(k, same, 1.0), DataError);
}

TEST_CASE("dual SVM against projected gradient") {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto k = kernel_matrix(random_points(8, 2, rng), cfg);
    const auto y = random_labels(8, rng);
    const double c = trial % 2 ? 1.0 : 5.0;
    const auto m = train_svm_dual(k, y, c);

    CHECK(std::abs(m.alphas.dot(y.cast<double>())) <= 1e-8);
    CHECK(m.alphas.minCoeff() >= 0.0);
    CHECK(m.alphas.maxCoeff() <= c);

    const auto ref = projected_gradient_dual(k, y, c, 20000);
    const double dual = dual_objective(k, y, m.alphas);
    CHECK(std::abs(dual - dual_objective(k, y, ref)) <= 1e-5);
    const double gap = primal_objective(k, y, m) - dual;
    CHECK(gap >= -1e-9);
    CHECK(gap <= 1e-5);

    // KKT conditions
    const Eigen::VectorXd ay = m.alphas.cwiseProduct(y.cast<double>());
    for (Eigen::Index i = 0; i < 8; ++i) {
      const double yf = y[i] * (k.row(i).dot(ay) + m.bias);
      if (m.alphas[i] <= 1e-12) CHECK(yf >= 1.0 - 1e-5);
      else if (m.alphas[i] >= c - 1e-12) CHECK(yf <= 1.0 + 1e-5);
      else CHECK(std::abs(yf - 1.0) <= 1e-5);
    }
    CHECK(train_svm_dual(k, y, c).alphas == m.alphas);
  }
}

TEST_CASE("non-convergence is reported") {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  Rng rng(4);
  const auto k = kernel_matrix(random_points(10, 2, rng), cfg);
  const auto y = random_labels(10, rng);
  DualSolverOptions opts;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(train_svm_dual(k, y, 1.0, opts), NumericError);
}

TEST_CASE("LS-SVM by hand") {
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(2, 2);
  Labels y(2);
  y << 1, -1;
  const auto inf = train_ls_svm(k, y);
  CHECK(std::abs(inf.bias) <= 1e-8);
  CHECK(std::abs(inf.a[0] - 1.0) <= 1e-8);
  CHECK(std::abs(inf.a[1] + 1.0) <= 1e-8);

  const auto one = train_ls_svm(k, y, 1.0);
  CHECK(std::abs(one.bias) <= 1e-8);
  CHECK(std::abs(one.a[0] - 0.5) <= 1e-8);
  CHECK(std::abs(one.a[1] + 0.5) <= 1e-8);

  CHECK(predict_kernel(inf, Eigen::Vector2d(1, 0)) == 1);
  CHECK(predict_kernel(inf, Eigen::Vector2d(0, 1)) == -1);

  CHECK_THROWS_AS(train_ls_svm(k, y, 0.0), ConfigError);
  // two identical points with opposite labels and no regularisation
  CHECK_THROWS_AS(train_ls_svm(Eigen::MatrixXd::Ones(2, 2), y), NumericError);
}

TEST_CASE("LS-SVM residual on random systems") {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto k = kernel_matrix(random_points(10, 2, rng), cfg);
    const auto y = random_labels(10, rng);
    const auto m = train_ls_svm(k, y, 100.0);
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(11, 11);
    f.block(0, 1, 1, 10).setOnes();
    f.block(1, 0, 10, 1).setOnes();
    f.block(1, 1, 10, 10) = k + Eigen::MatrixXd::Identity(10, 10) / 100.0;
    Eigen::VectorXd sol(11), rhs = Eigen::VectorXd::Zero(11);
    sol << m.bias, m.a;
    rhs.tail(10) = y.cast<double>();
    CHECK((f * sol - rhs).norm() <= 1e-8 * y.cast<double>().norm());
    CHECK(m.residual <= 1e-8 * y.cast<double>().norm());
    CHECK(std::abs(m.a.sum()) <= 1e-10);
  }
}
