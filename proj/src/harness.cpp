#include "hqml/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "hqml/error.hpp"
#include "hqml/featsel.hpp"
#include "hqml/featuremap.hpp"
#include "hqml/qsvm.hpp"
#include "hqml/resample.hpp"
#include "hqml/rng.hpp"
#include "hqml/vqc.hpp"

namespace hqml {

namespace {

std::string tagged(const char* stage, const std::exception& e) { return std::string("[") + stage + "] " + e.what(); }

// Runs one pipeline stage, prefixing any library error with the stage name
// while keeping its type (and therefore its exit code).
template <typename F>
auto staged(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const DegenerateProblemError& e) {
    throw DegenerateProblemError(tagged(stage, e));
  } catch (const DataError& e) {
    throw DataError(tagged(stage, e));
  } catch (const ArgumentError& e) {
    throw ArgumentError(tagged(stage, e));
  } catch (const ShapeError& e) {
    throw ShapeError(tagged(stage, e));
  } catch (const IndexError& e) {
    throw IndexError(tagged(stage, e));
  } catch (const ConfigError& e) {
    throw ConfigError(tagged(stage, e));
  } catch (const NumericError& e) {
    throw NumericError(tagged(stage, e));
  }
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  return s.substr(a, s.find_last_not_of(" \t\r\n") - a + 1);
}

long long to_integer(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long long out = 0;
  try {
    out = std::stoll(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("setting '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) throw ConfigError("setting '" + key + "' expects a number, got '" + v + "'");
  return out;
}

const char* name_of(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Vqc: return "vqc";
    case ClassifierKind::SvmDual: return "svm-dual";
    case ClassifierKind::SvmLs: return "svm-ls";
  }
  return "?";
}

const char* name_of(SelectionMethod m) {
  switch (m) {
    case SelectionMethod::None: return "none";
    case SelectionMethod::Tree: return "tree";
    case SelectionMethod::Boost: return "boost";
  }
  return "?";
}

const char* name_of(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::None: return "none";
    case ResampleMethod::Smote: return "smote";
    case ResampleMethod::Adasyn: return "adasyn";
    case ResampleMethod::KMeans: return "kmeans";
    case ResampleMethod::Enn: return "enn";
    case ResampleMethod::SmoteEnn: return "smote-enn";
  }
  return "?";
}

Json labels_to_json(const Labels& y) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < y.size(); ++i) out.push_back(y[i]);
  return out;
}

// P(|T| <= t) for integer degrees of freedom (closed-form finite sums).
double student_t_central(double t, int dof) {
  const double theta = std::atan(t / std::sqrt(static_cast<double>(dof)));
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s = std::sin(theta);
  if (dof % 2 == 1) {
    if (dof == 1) return 2.0 * theta / std::numbers::pi;
    double term = std::cos(theta), sum = term;
    for (int k = 3; k <= dof - 2; k += 2) {
      term *= c2 * (k - 1) / static_cast<double>(k);
      sum += term;
    }
    return 2.0 / std::numbers::pi * (theta + s * sum);
  }
  double term = 1.0, sum = 1.0;
  for (int k = 2; k <= dof - 2; k += 2) {
    term *= c2 * (k - 1) / static_cast<double>(k);
    sum += term;
  }
  return s * sum;
}

template <typename F>
double invert_increasing(F&& f, double target) {
  double lo = 0.0, hi = 1.0;
  while (f(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-13 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

// Metrics ---------------------------------------------------------------------

double accuracy(const Labels& predictions, const Labels& labels) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  if (labels.size() == 0) throw ArgumentError("accuracy of an empty prediction set");
  return static_cast<double>((predictions.array() == labels.array()).count()) / static_cast<double>(labels.size());
}

Confusion confusion(const Labels& predictions, const Labels& labels) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  Confusion c;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    const bool pred_pos = predictions[i] == 1, true_pos = labels[i] == 1;
    if (pred_pos && true_pos) ++c.tp;
    else if (!pred_pos && !true_pos) ++c.tn;
    else if (pred_pos) ++c.fp;
    else ++c.fn;
  }
  return c;
}

double recall(const Labels& predictions, const Labels& labels, int label) {
  if (predictions.size() != labels.size()) throw ShapeError("prediction and label counts differ");
  Eigen::Index total = 0, hit = 0;
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != label) continue;
    ++total;
    hit += (predictions[i] == label);
  }
  return total == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(total);
}

double normal_quantile(double level) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
  if (level == 0.95) return 1.959964;
  return invert_increasing([](double z) { return std::erf(z / std::numbers::sqrt2); }, level);
}

double student_t_quantile(double level, int dof) {
  if (!(level > 0.0 && level < 1.0)) throw ArgumentError("confidence level must lie in (0, 1)");
  if (dof < 1) throw ArgumentError("Student-t needs at least one degree of freedom");
  return invert_increasing([dof](double t) { return student_t_central(t, dof); }, level);
}

Interval confidence_interval(const std::vector<double>& values, double level, IntervalKind kind) {
  const auto n = values.size();
  if (n < 2) throw ArgumentError("confidence interval needs at least 2 values");
  const Eigen::Map<const Eigen::VectorXd> v(values.data(), static_cast<Eigen::Index>(n));
  const double mean = v.mean();
  const double s = std::sqrt((v.array() - mean).square().sum() / static_cast<double>(n - 1));
  const double q = kind == IntervalKind::Normal ? normal_quantile(level)
                                                : student_t_quantile(level, static_cast<int>(n) - 1);
  return {mean, q * s / std::sqrt(static_cast<double>(n))};
}

std::string format_interval(const Interval& ci) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%% (+- %.2f%%)", 100.0 * ci.mean, 100.0 * ci.halfwidth);
  return buf;
}

// Configuration ---------------------------------------------------------------

const std::vector<std::string>& experiment_keys() {
  static const std::vector<std::string> keys{
      "data",   "label",       "classifier", "select",     "k",          "resample", "smote-k",  "enn-k",
      "qubits", "layers",      "reps",       "shots",      "test-fraction", "repeats", "seed",   "samples",
      "iters",  "spsa-a",      "spsa-c",     "spsa-alpha", "spsa-gamma", "C",        "gamma",    "depth",
      "rounds", "lr",          "ci-level",   "ci"};
  return keys;
}

void ExperimentConfig::set(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  auto integer = [&] { return to_integer(key, v); };
  auto real = [&] { return to_real(key, v); };
  if (key == "data") data_path = v;
  else if (key == "label") label_column = v;
  else if (key == "classifier") {
    if (v == "vqc") classifier = ClassifierKind::Vqc;
    else if (v == "svm-dual") classifier = ClassifierKind::SvmDual;
    else if (v == "svm-ls") classifier = ClassifierKind::SvmLs;
    else throw ConfigError("unknown classifier '" + v + "' (vqc, svm-dual, svm-ls)");
  } else if (key == "select") {
    if (v == "none") selection = SelectionMethod::None;
    else if (v == "tree") selection = SelectionMethod::Tree;
    else if (v == "boost") selection = SelectionMethod::Boost;
    else throw ConfigError("unknown selection method '" + v + "' (none, tree, boost)");
  } else if (key == "resample") {
    if (v == "none") resample = ResampleMethod::None;
    else if (v == "smote") resample = ResampleMethod::Smote;
    else if (v == "adasyn") resample = ResampleMethod::Adasyn;
    else if (v == "kmeans") resample = ResampleMethod::KMeans;
    else if (v == "enn") resample = ResampleMethod::Enn;
    else if (v == "smote-enn") resample = ResampleMethod::SmoteEnn;
    else throw ConfigError("unknown resampling method '" + v + "'");
  } else if (key == "ci") {
    if (v == "normal") ci_kind = IntervalKind::Normal;
    else if (v == "t") ci_kind = IntervalKind::StudentT;
    else throw ConfigError("unknown interval kind '" + v + "' (normal, t)");
  }
  else if (key == "k") k = static_cast<int>(integer());
  else if (key == "smote-k") smote_k = static_cast<int>(integer());
  else if (key == "enn-k") enn_k = static_cast<int>(integer());
  else if (key == "qubits") qubits = static_cast<int>(integer());
  else if (key == "layers") layers = static_cast<int>(integer());
  else if (key == "reps") reps = static_cast<int>(integer());
  else if (key == "shots") shots = integer();
  else if (key == "test-fraction") test_fraction = real();
  else if (key == "repeats") repeats = static_cast<int>(integer());
  else if (key == "seed") seed = static_cast<std::uint64_t>(integer());
  else if (key == "samples") samples = static_cast<Eigen::Index>(integer());
  else if (key == "iters") iters = static_cast<int>(integer());
  else if (key == "spsa-a") spsa_a = real();
  else if (key == "spsa-c") spsa_c = real();
  else if (key == "spsa-alpha") spsa_alpha = real();
  else if (key == "spsa-gamma") spsa_gamma = real();
  else if (key == "C") svm_c = real();
  else if (key == "gamma") ls_gamma = (v == "inf") ? std::numeric_limits<double>::infinity() : real();
  else if (key == "depth") tree_depth = static_cast<int>(integer());
  else if (key == "rounds") boost_rounds = static_cast<int>(integer());
  else if (key == "lr") boost_lr = real();
  else if (key == "ci-level") ci_level = real();
  else throw ConfigError("unknown setting '" + key + "'");
}

void ExperimentConfig::validate() const {
  check_qubit_count(qubits);
  if (k != 0 && k != qubits) throw ConfigError("k must equal qubits (one qubit per selected feature)");
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ConfigError("test-fraction must lie in (0, 1)");
  if (repeats < 1) throw ConfigError("repeats must be >= 1");
  if (layers < 0) throw ConfigError("layers must be >= 0");
  if (reps < 1) throw ConfigError("reps must be >= 1");
  if (shots < 0) throw ConfigError("shots must be >= 0 (0 = exact)");
  if (samples < 0) throw ConfigError("samples must be >= 0 (0 = all rows)");
  if (iters < 0) throw ConfigError("iters must be >= 0");
  if (!(svm_c > 0.0)) throw ConfigError("C must be positive");
  if (!(ls_gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (smote_k < 1 || enn_k < 1) throw ConfigError("neighbour counts must be >= 1");
  if (tree_depth < 0 || boost_rounds < 1 || !(boost_lr > 0.0)) throw ConfigError("invalid selection parameters");
  if (!(ci_level > 0.0 && ci_level < 1.0)) throw ConfigError("ci-level must lie in (0, 1)");
}

Json ExperimentConfig::to_json() const {
  Json gamma = std::isinf(ls_gamma) ? Json("inf") : Json(ls_gamma);
  return {{"data", data_path},
          {"label", label_column},
          {"classifier", name_of(classifier)},
          {"select", name_of(selection)},
          {"k", selected_features()},
          {"resample", name_of(resample)},
          {"smote-k", smote_k},
          {"enn-k", enn_k},
          {"qubits", qubits},
          {"layers", layers},
          {"reps", reps},
          {"shots", shots},
          {"test-fraction", test_fraction},
          {"repeats", repeats},
          {"seed", seed},
          {"samples", samples},
          {"iters", iters},
          {"spsa-a", spsa_a},
          {"spsa-c", spsa_c},
          {"spsa-alpha", spsa_alpha},
          {"spsa-gamma", spsa_gamma},
          {"C", svm_c},
          {"gamma", gamma},
          {"depth", tree_depth},
          {"rounds", boost_rounds},
          {"lr", boost_lr},
          {"ci-level", ci_level},
          {"ci", ci_kind == IntervalKind::Normal ? "normal" : "t"}};
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Experiment ------------------------------------------------------------------

RepeatResult run_repeat(const Dataset& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  RepeatResult out;
  out.seed = seed;
  const int minority = minority_label(data.labels);

  std::vector<Eigen::Index> pool(static_cast<std::size_t>(data.rows()));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  if (cfg.samples > 0 && cfg.samples < data.rows())
    pool = staged("subsample", [&] { return stratified_subsample(data.labels, cfg.samples, derive_seed(seed, {1})); });
  const Dataset sampled = data.select_rows(pool);

  const auto split = staged("split", [&] {
    return stratified_split_indices(sampled.labels, cfg.test_fraction, derive_seed(seed, {2}));
  });
  Dataset train = sampled.select_rows(split.train);
  Dataset test = sampled.select_rows(split.test);
  for (auto i : split.test) out.test_indices.push_back(pool[static_cast<std::size_t>(i)]);

  const int n_features = cfg.selected_features();
  staged("select", [&] {
    if (cfg.selection == SelectionMethod::None) {
      if (train.dim() != n_features)
        throw ConfigError("data has " + std::to_string(train.dim()) + " features but " + std::to_string(n_features) +
                          " qubits; enable feature selection or adjust qubits");
      return;
    }
    const auto report = cfg.selection == SelectionMethod::Tree
                            ? tree_importance(train_tree(train.features, train.labels, cfg.tree_depth), train.rows())
                            : boosted_importance(train.features, train.labels, cfg.boost_rounds, cfg.boost_lr);
    const auto cols = select_top_k(report, n_features);
    train = train.select_columns(cols);
    test = test.select_columns(cols);
  });
  out.features = train.feature_names;

  staged("resample", [&] {
    const auto in = LabeledSet::from(train);
    const auto rseed = derive_seed(seed, {3});
    LabeledSet res;
    switch (cfg.resample) {
      case ResampleMethod::None: return;
      case ResampleMethod::Smote: res = smote_balance(in, cfg.smote_k, rseed); break;
      case ResampleMethod::Adasyn: res = adasyn_balance(in, cfg.smote_k, rseed); break;
      case ResampleMethod::KMeans: res = kmeans_balance(in, rseed); break;
      case ResampleMethod::Enn: res = enn_undersample(in, cfg.enn_k).set; break;
      case ResampleMethod::SmoteEnn: res = smote_enn(in, cfg.smote_k, cfg.enn_k, rseed); break;
    }
    if (count_label(res.labels, 1) == 0 || count_label(res.labels, -1) == 0)
      throw DegenerateProblemError("resampling left a single class");
    const auto mask = res.synthetic_mask();
    out.synthetic_rows = static_cast<Eigen::Index>(std::count(mask.begin(), mask.end(), true));
    train = res.to_dataset(train.feature_names);
  });
  out.train_rows = train.rows();

  const auto fm = FeatureMapConfig::with_defaults(n_features, cfg.reps);
  const Shots shots = Shots::of(cfg.shots);
  staged("train", [&] {
    if (cfg.classifier == ClassifierKind::Vqc) {
      TrainConfig tc;
      tc.max_iters = cfg.iters;
      tc.a = cfg.spsa_a;
      tc.c = cfg.spsa_c;
      tc.alpha = cfg.spsa_alpha;
      tc.gamma = cfg.spsa_gamma;
      tc.shots = shots;
      tc.seed = derive_seed(seed, {4});
      const auto model = train_vqc(train, fm, cfg.layers, tc);
      out.train_predictions = classify(model, train.features, shots, derive_seed(seed, {5}));
      out.test_predictions = classify(model, test.features, shots, derive_seed(seed, {6}));
      return;
    }
    const auto scaling = fit_scaling(train.features);
    const auto xs = scale_features(train.features, scaling);
    const auto ts = scale_features(test.features, scaling);
    const auto k_train = kernel_matrix(xs, fm, shots, derive_seed(seed, {4}));
    const auto k_test = cross_kernel(ts, xs, fm, shots, derive_seed(seed, {6}));
    if (cfg.classifier == ClassifierKind::SvmDual) {
      const auto model = train_svm_dual(k_train, train.labels, cfg.svm_c);
      out.train_predictions = predict_kernel_rows(model, k_train);
      out.test_predictions = predict_kernel_rows(model, k_test);
    } else {
      const auto model = train_ls_svm(k_train, train.labels, cfg.ls_gamma);
      out.train_predictions = predict_kernel_rows(model, k_train);
      out.test_predictions = predict_kernel_rows(model, k_test);
    }
  });

  out.train_labels = train.labels;
  out.test_labels = test.labels;
  out.train_accuracy = accuracy(out.train_predictions, out.train_labels);
  out.test_accuracy = accuracy(out.test_predictions, out.test_labels);
  out.minority_recall = recall(out.test_predictions, out.test_labels, minority);
  out.confusion = confusion(out.test_predictions, out.test_labels);
  out.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RunResult run_experiment(const Dataset& data, const ExperimentConfig& cfg) {
  staged("config", [&] { cfg.validate(); });
  staged("load", [&] { data.validate(); });
  RunResult result;
  result.config = cfg;
  result.minority_class = minority_label(data.labels);
  std::vector<double> acc;
  for (int r = 0; r < cfg.repeats; ++r) {
    result.repeats.push_back(run_repeat(data, cfg, derive_seed(cfg.seed, {static_cast<std::uint64_t>(r)})));
    acc.push_back(result.repeats.back().test_accuracy);
  }
  const auto n = static_cast<double>(cfg.repeats);
  for (const auto& r : result.repeats) {
    result.mean_accuracy += r.test_accuracy / n;
    result.mean_train_accuracy += r.train_accuracy / n;
    result.mean_minority_recall += r.minority_recall / n;
  }
  if (cfg.repeats >= 2) {
    result.has_interval = true;
    result.interval = confidence_interval(acc, cfg.ci_level, cfg.ci_kind);
    result.mean_accuracy = result.interval.mean;
  } else {
    result.interval = {result.mean_accuracy, 0.0};
  }
  return result;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  staged("config", [&] { cfg.validate(); });
  const auto data = staged("load", [&] { return load_csv(cfg.data_path, cfg.label_column); });
  return run_experiment(data, cfg);
}

Json RunResult::to_json() const {
  Json per = Json::array();
  for (std::size_t r = 0; r < repeats.size(); ++r) {
    const auto& x = repeats[r];
    Json test_idx = Json::array();
    for (auto i : x.test_indices) test_idx.push_back(i);
    per.push_back({{"repeat", r},
                   {"seed", x.seed},
                   {"features", x.features},
                   {"train_rows", x.train_rows},
                   {"synthetic_rows", x.synthetic_rows},
                   {"train_accuracy", x.train_accuracy},
                   {"test_accuracy", x.test_accuracy},
                   {"minority_recall", x.minority_recall},
                   {"confusion", {{"tp", x.confusion.tp}, {"tn", x.confusion.tn}, {"fp", x.confusion.fp}, {"fn", x.confusion.fn}}},
                   {"test_indices", test_idx},
                   {"test_labels", labels_to_json(x.test_labels)},
                   {"test_predictions", labels_to_json(x.test_predictions)},
                   {"train_labels", labels_to_json(x.train_labels)},
                   {"train_predictions", labels_to_json(x.train_predictions)},
                   {"wall_time_s", x.wall_time_s}});
  }
  Json out = {{"config", config.to_json()},
              {"minority_class", minority_class},
              {"mean_accuracy", mean_accuracy},
              {"ci_halfwidth", has_interval ? Json(interval.halfwidth) : Json(nullptr)},
              {"ci_level", config.ci_level},
              {"ci_method", config.ci_kind == IntervalKind::Normal ? "normal" : "t"},
              {"accuracy_report", has_interval ? format_interval(interval) : format_interval({mean_accuracy, 0.0})},
              {"mean_train_accuracy", mean_train_accuracy},
              {"mean_minority_recall", mean_minority_recall},
              {"per_repeat", per}};
  return out;
}

Json strip_timing(Json doc) {
  if (doc.is_object()) {
    doc.erase("wall_time_s");
    for (auto& v : doc) v = strip_timing(v);
  } else if (doc.is_array()) {
    for (auto& v : doc) v = strip_timing(v);
  }
  return doc;
}

}  // namespace hqml
