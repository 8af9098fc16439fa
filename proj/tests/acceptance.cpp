// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "hqml/dataset.hpp"
#include "hqml/featsel.hpp"
#include "hqml/harness.hpp"
#include "hqml/io.hpp"
#include "hqml/qsvm.hpp"
#include "hqml/vqc.hpp"
#include "oracle.hpp"

using namespace hqml;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int failures = 0;

void criterion(const char* id, double budget_s, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = o.pass && secs < budget_s;
  if (!ok) ++failures;
  std::printf("%s %s  %s  [%.2fs of %.0fs]\n", id, ok ? "PASS" : "FAIL", o.detail.c_str(), secs, budget_s);
  std::fflush(stdout);
}

Outcome a1() {
  Rng rng(2024);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const auto c = oracle::random_circuit(3, 1 + static_cast<int>(rng.uniform_index(20)), rng);
    StateVector s(3);
    s.apply(c);
    worst = std::max(worst, (s.amplitudes() - oracle::run(c)).cwiseAbs().maxCoeff());
  }
  return {worst <= 1e-10, fmt("max amplitude error %.2e over 100 circuits", worst)};
}

Outcome a2() {
  const auto cfg = FeatureMapConfig::with_defaults(1);
  FeatureVector zero = FeatureVector::Zero(1);
  double worst = 0.0;
  for (int k = 0; k <= 16; ++k) {
    const double x = k * kPi / 8;
    worst = std::max(worst, std::abs(kernel_entry(FeatureVector::Constant(1, x), zero, cfg) - std::pow(std::cos(x), 2)));
  }
  return {worst <= 1e-10, fmt("max |k - cos^2 x| %.2e", worst)};
}

ExperimentConfig fixture_config(ClassifierKind kind) {
  ExperimentConfig cfg;
  cfg.classifier = kind;
  cfg.qubits = 2;
  cfg.layers = 2;
  cfg.iters = 200;
  cfg.seed = 0;
  cfg.svm_c = 1.0;
  cfg.ls_gamma = 100.0;
  return cfg;
}

Outcome a3() {
  const auto r = run_experiment(separable_fixture(), fixture_config(ClassifierKind::Vqc));
  const auto& rep = r.repeats[0];
  return {rep.train_accuracy >= 0.90 && rep.test_accuracy >= 0.85,
          fmt("train %.3f (>= 0.90), test %.3f (>= 0.85)", rep.train_accuracy, rep.test_accuracy)};
}

Outcome a4() {
  const auto data = separable_fixture();
  const auto dual = run_experiment(data, fixture_config(ClassifierKind::SvmDual)).repeats[0];
  const auto ls = run_experiment(data, fixture_config(ClassifierKind::SvmLs)).repeats[0];
  const double agree = static_cast<double>((dual.test_predictions.array() == ls.test_predictions.array()).count()) /
                       static_cast<double>(dual.test_predictions.size());

  // K = I, y = (+1, -1): dual alphas (1, 1), b 0; LS a = (1, -1) at gamma inf, (1/2, -1/2) at gamma 1
  const Eigen::MatrixXd k = Eigen::MatrixXd::Identity(2, 2);
  Labels y(2);
  y << 1, -1;
  const auto d = train_svm_dual(k, y, 10.0);
  const auto inf = train_ls_svm(k, y);
  const auto one = train_ls_svm(k, y, 1.0);
  const double hand = std::max({std::abs(d.alphas[0] - 1), std::abs(d.alphas[1] - 1), std::abs(d.bias),
                                std::abs(inf.a[0] - 1), std::abs(inf.a[1] + 1), std::abs(inf.bias),
                                std::abs(one.a[0] - 0.5), std::abs(one.a[1] + 0.5), std::abs(one.bias)});
  return {dual.test_accuracy >= 0.90 && agree >= 0.90 && hand <= 1e-8,
          fmt("dual test %.3f (>= 0.90), LS agreement %.3f (>= 0.90), hand fixtures max error %.1e",
              dual.test_accuracy, agree, hand)};
}

Outcome a5() {
  const auto cfg = FeatureMapConfig::with_defaults(2);
  const Eigen::Vector2d x(1.0, 2.5), y(1.3, 2.0);
  const double exact = kernel_entry(x, y, cfg);
  std::string detail = fmt("k = %.4f; mean error", exact);
  double prev = 1.0, last = 0.0;
  bool monotone = true;
  for (std::int64_t r : {100, 1000, 10000}) {
    double err = 0.0;
    for (std::uint64_t s = 0; s < 20; ++s) err += std::abs(kernel_entry(x, y, cfg, Shots::of(r), s) - exact);
    err /= 20.0;
    monotone = monotone && err < prev;
    prev = last = err;
    detail += fmt(" R=%lld: %.4f", static_cast<long long>(r), err);
  }
  return {monotone && last <= 0.02, detail + " (monotone, <= 0.02 at 10^4)"};
}

Outcome a6() {
  Rng rng(606);
  const auto cfg = FeatureMapConfig::with_defaults(3);
  bool ok = true;
  double min_eig = 1.0, asym = 0.0, diag = 0.0;
  for (int t = 0; t < 10; ++t) {
    Eigen::MatrixXd x(8, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform() * 2 * kPi;
    const auto d = diagnose_kernel(kernel_matrix(x, cfg));
    ok = ok && d.valid(1e-10, 1e-8);
    min_eig = std::min(min_eig, d.min_eigenvalue);
    asym = std::max(asym, d.max_asymmetry);
    diag = std::max(diag, d.max_diagonal_deviation);
  }
  return {ok, fmt("min eigenvalue %.2e, asymmetry %.1e, diagonal deviation %.1e", min_eig, asym, diag)};
}

Outcome a7() {
  const auto data = imbalanced_fixture();
  auto cfg = fixture_config(ClassifierKind::SvmDual);
  cfg.repeats = 10;
  const auto base = run_experiment(data, cfg);
  cfg.resample = ResampleMethod::SmoteEnn;
  const auto res = run_experiment(data, cfg);
  const bool recall_ok = res.mean_minority_recall >= base.mean_minority_recall;
  const bool acc_ok = res.mean_accuracy >= base.mean_accuracy - 0.02;
  return {recall_ok && acc_ok,
          fmt("minority recall %.3f -> %.3f, accuracy %.3f -> %.3f (kernel SVM, 10 paired repeats)",
              base.mean_minority_recall, res.mean_minority_recall, base.mean_accuracy, res.mean_accuracy)};
}

Outcome a8() {
  const auto ci = confidence_interval({0.7, 0.8});
  const auto flat = confidence_interval(std::vector<double>(10, 0.74));
  return {std::abs(ci.mean - 0.75) <= 1e-4 && std::abs(ci.halfwidth - 0.0980) <= 1e-4 && flat.halfwidth == 0.0,
          fmt("(0.7, 0.8) -> (%.4f, %.4f); ten equal values -> halfwidth %g", ci.mean, ci.halfwidth, flat.halfwidth)};
}

Outcome a9() {
  int tree_hits = 0, boost_hits = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto d = planted_signal_fixture(200, 9, seed);
    tree_hits += select_top_k(tree_importance(train_tree(d.features, d.labels), d.rows()), 1)[0] == 0;
    boost_hits += select_top_k(boosted_importance(d.features, d.labels), 1)[0] == 0;
  }
  return {tree_hits >= 19 && boost_hits >= 19, fmt("planted feature ranked first: tree %d/20, boost %d/20", tree_hits, boost_hits)};
}

int run_cli(const std::string& args) {
  const int status = std::system((std::string(HQML_CLI_PATH) + " " + args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome a10() {
  const auto dir = fs::temp_directory_path() / "hqml_acceptance";
  fs::create_directories(dir);
  write_csv(dir / "fixture.csv", separable_fixture());
  std::ofstream(dir / "run.cfg") << "data = " << (dir / "fixture.csv").string()
                                 << "\nclassifier = vqc\nqubits = 2\nrepeats = 3\niters = 100\nseed = 5\n";
  for (const char* name : {"a.json", "b.json"})
    if (run_cli("experiment --config " + (dir / "run.cfg").string() + " --out " + (dir / name).string()) != 0)
      return {false, "experiment command failed"};
  const auto a = strip_timing(read_json(dir / "a.json")).dump(2);
  const auto b = strip_timing(read_json(dir / "b.json")).dump(2);
  return {a == b, fmt("%zu-byte result documents %s after removing wall_time_s", a.size(), a == b ? "identical" : "differ")};
}

}  // namespace

int main() {
  criterion("A1", 10, a1);
  criterion("A2", 1, a2);
  criterion("A3", 300, a3);
  criterion("A4", 60, a4);
  criterion("A5", 120, a5);
  criterion("A6", 10, a6);
  criterion("A7", 600, a7);
  criterion("A8", 1, a8);
  criterion("A9", 60, a9);
  criterion("A10", 60, a10);
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
