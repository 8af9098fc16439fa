#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hqml/dataset.hpp"

namespace hqml {

using Json = nlohmann::ordered_json;

double accuracy(const Labels& predictions, const Labels& labels);

struct Confusion {
  Eigen::Index tp = 0, tn = 0, fp = 0, fn = 0;  // positive class is +1

  Eigen::Index total() const { return tp + tn + fp + fn; }
};
Confusion confusion(const Labels& predictions, const Labels& labels);

/// Fraction of rows labelled `label` that were predicted as `label`.
double recall(const Labels& predictions, const Labels& labels, int label);

struct Interval {
  double mean = 0.0;
  double halfwidth = 0.0;
};

enum class IntervalKind { Normal, StudentT };

/// mean +- q * s / sqrt(n), s the sample standard deviation. q is the normal
/// quantile (1.959964 at 95%) or the two-sided Student-t quantile with n - 1
/// degrees of freedom.
Interval confidence_interval(const std::vector<double>& values, double level = 0.95,
                             IntervalKind kind = IntervalKind::Normal);

/// Two-sided quantiles: P(|Z| <= q) = level, P(|T_dof| <= q) = level.
double normal_quantile(double level);
double student_t_quantile(double level, int dof);

/// "74.00% (+- 11.35%)".
std::string format_interval(const Interval& ci);

enum class ClassifierKind { Vqc, SvmDual, SvmLs };
enum class SelectionMethod { None, Tree, Boost };
enum class ResampleMethod { None, Smote, Adasyn, KMeans, Enn, SmoteEnn };

struct ExperimentConfig {
  std::string data_path;
  std::string label_column = "label";
  ClassifierKind classifier = ClassifierKind::Vqc;
  SelectionMethod selection = SelectionMethod::None;
  int k = 0;  // 0 -> same as qubits
  ResampleMethod resample = ResampleMethod::None;
  int smote_k = 5;
  int enn_k = 3;
  int qubits = 2;
  int layers = 2;
  int reps = 2;  // feature-map repetitions
  std::int64_t shots = 0;  // 0 = exact
  double test_fraction = 0.5;
  int repeats = 1;
  std::uint64_t seed = 0;
  Eigen::Index samples = 0;  // rows drawn per repeat, 0 = all

  int iters = 200;
  double spsa_a = 0.1;
  double spsa_c = 0.1;
  double spsa_alpha = 0.602;
  double spsa_gamma = 0.101;

  double svm_c = 1.0;
  double ls_gamma = 100.0;

  int tree_depth = 5;
  int boost_rounds = 50;
  double boost_lr = 0.3;

  double ci_level = 0.95;
  IntervalKind ci_kind = IntervalKind::Normal;

  /// Applies one `key = value` setting; keys match the CLI flag names.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  int selected_features() const { return k == 0 ? qubits : k; }
  Json to_json() const;
};

/// Names accepted by ExperimentConfig::set.
const std::vector<std::string>& experiment_keys();

/// Flat `key = value` lines; '#' starts a comment, blank lines are ignored.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

struct RepeatResult {
  std::uint64_t seed = 0;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
  double minority_recall = 0.0;
  Confusion confusion;
  std::vector<std::string> features;
  Eigen::Index train_rows = 0;     // after resampling
  Eigen::Index synthetic_rows = 0;
  std::vector<Eigen::Index> test_indices;  // rows of the loaded dataset
  Labels test_labels;
  Labels test_predictions;
  Labels train_labels;
  Labels train_predictions;
  double wall_time_s = 0.0;
};

struct RunResult {
  ExperimentConfig config;
  std::vector<RepeatResult> repeats;
  int minority_class = 1;
  double mean_accuracy = 0.0;
  double mean_train_accuracy = 0.0;
  double mean_minority_recall = 0.0;
  bool has_interval = false;
  Interval interval;

  Json to_json() const;
};

/// One repeat on an in-memory dataset (seed already derived).
RepeatResult run_repeat(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed);

/// Full protocol; repeat r uses derive_seed(cfg.seed, {r}).
RunResult run_experiment(const ExperimentConfig& cfg);
RunResult run_experiment(const Dataset& data, const ExperimentConfig& cfg);

/// Copy of a result document with every "wall_time_s" key removed.
Json strip_timing(Json doc);

}  // namespace hqml
