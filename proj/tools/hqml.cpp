// hqml command-line driver.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric failure.

#include <cstdint>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hqml/dataset.hpp"
#include "hqml/error.hpp"
#include "hqml/featsel.hpp"
#include "hqml/featuremap.hpp"
#include "hqml/harness.hpp"
#include "hqml/io.hpp"
#include "hqml/qsvm.hpp"
#include "hqml/resample.hpp"
#include "hqml/vqc.hpp"

namespace {

using hqml::Json;

void emit(const Json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    hqml::write_json(path, j);
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (used != cell.size() && cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw hqml::ConfigError("cannot parse '" + cell + "' as a number");
    }
  }
  if (out.empty()) throw hqml::ConfigError("empty value list");
  return out;
}

struct DataArgs {
  std::string path;
  std::string label = "label";

  void attach(CLI::App* cmd) {
    cmd->add_option("--data", path, "Dataset CSV with a header row")->required();
    cmd->add_option("--label", label, "Label column name")->capture_default_str();
  }
  hqml::Dataset load() const { return hqml::load_csv(path, label); }
};

Json labels_json(const hqml::Labels& y) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < y.size(); ++i) out.push_back(y[i]);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid quantum-classical classification toolkit (statevector simulation)"};
  app.require_subcommand(1);

  // embed ---------------------------------------------------------------------
  auto* embed_cmd = app.add_subcommand("embed", "Embed a scaled feature vector with the ZZ feature map");
  std::string embed_x;
  int embed_reps = 2;
  bool embed_circuit = false;
  std::string embed_out;
  embed_cmd->add_option("--x", embed_x, "Comma-separated features in [0, 2pi]")->required();
  embed_cmd->add_option("--reps", embed_reps, "Feature-map repetitions")->capture_default_str();
  embed_cmd->add_flag("--circuit", embed_circuit, "Include the gate list");
  embed_cmd->add_option("--out", embed_out, "Output JSON path (default stdout)");

  // kernel --------------------------------------------------------------------
  auto* kernel_cmd = app.add_subcommand("kernel", "Fidelity-kernel Gram matrix of a dataset");
  DataArgs kernel_data;
  kernel_data.attach(kernel_cmd);
  std::int64_t kernel_shots = 0;
  std::uint64_t kernel_seed = 0;
  int kernel_reps = 2;
  std::string kernel_out, kernel_scaling;
  kernel_cmd->add_option("--shots", kernel_shots, "Shots per entry, 0 = exact")->capture_default_str();
  kernel_cmd->add_option("--seed", kernel_seed)->capture_default_str();
  kernel_cmd->add_option("--reps", kernel_reps, "Feature-map repetitions")->capture_default_str();
  kernel_cmd->add_option("--out", kernel_out, "Kernel CSV path (default stdout)");
  kernel_cmd->add_option("--scaling-out", kernel_scaling, "Write the fitted scaling JSON here");

  // select-features -----------------------------------------------------------
  auto* select_cmd = app.add_subcommand("select-features", "Rank features and keep the top k");
  DataArgs select_data;
  select_data.attach(select_cmd);
  std::string select_method = "tree";
  int select_k = 0, select_depth = 5, select_rounds = 50;
  double select_lr = 0.3;
  std::string select_report, select_out;
  select_cmd->add_option("--method", select_method)->check(CLI::IsMember({"tree", "boost"}))->capture_default_str();
  select_cmd->add_option("--k", select_k, "Number of features to keep")->required();
  select_cmd->add_option("--depth", select_depth, "Tree depth")->capture_default_str();
  select_cmd->add_option("--rounds", select_rounds, "Boosting rounds")->capture_default_str();
  select_cmd->add_option("--lr", select_lr, "Boosting learning rate")->capture_default_str();
  select_cmd->add_option("--report", select_report, "Importance JSON path (default stdout)");
  select_cmd->add_option("--out", select_out, "Reduced dataset CSV path");

  // resample ------------------------------------------------------------------
  auto* resample_cmd = app.add_subcommand("resample", "Rebalance a dataset");
  DataArgs resample_data;
  resample_data.attach(resample_cmd);
  std::string resample_method;
  int resample_smote_k = 5, resample_enn_k = 3;
  std::uint64_t resample_seed = 0;
  std::string resample_out;
  resample_cmd->add_option("--method", resample_method)
      ->check(CLI::IsMember({"smote", "adasyn", "kmeans", "enn", "smote-enn"}))
      ->required();
  resample_cmd->add_option("--smote-k", resample_smote_k)->capture_default_str();
  resample_cmd->add_option("--enn-k", resample_enn_k)->capture_default_str();
  resample_cmd->add_option("--seed", resample_seed)->capture_default_str();
  resample_cmd->add_option("--out", resample_out, "Output CSV (adds a synthetic column)")->required();

  // train-vqc -----------------------------------------------------------------
  auto* vqc_cmd = app.add_subcommand("train-vqc", "Train a variational quantum classifier");
  DataArgs vqc_data;
  vqc_data.attach(vqc_cmd);
  int vqc_qubits = 0, vqc_layers = 2, vqc_iters = 200, vqc_reps = 2;
  std::int64_t vqc_shots = 0;
  std::uint64_t vqc_seed = 0;
  hqml::TrainConfig vqc_tc;
  std::string vqc_out, vqc_metrics;
  vqc_cmd->add_option("--qubits", vqc_qubits, "Qubits (= feature columns)")->required();
  vqc_cmd->add_option("--layers", vqc_layers)->capture_default_str();
  vqc_cmd->add_option("--iters", vqc_iters, "SPSA iterations")->capture_default_str();
  vqc_cmd->add_option("--shots", vqc_shots, "0 = exact probabilities")->capture_default_str();
  vqc_cmd->add_option("--seed", vqc_seed)->capture_default_str();
  vqc_cmd->add_option("--reps", vqc_reps, "Feature-map repetitions")->capture_default_str();
  vqc_cmd->add_option("--spsa-a", vqc_tc.a)->capture_default_str();
  vqc_cmd->add_option("--spsa-c", vqc_tc.c)->capture_default_str();
  vqc_cmd->add_option("--spsa-alpha", vqc_tc.alpha)->capture_default_str();
  vqc_cmd->add_option("--spsa-gamma", vqc_tc.gamma)->capture_default_str();
  vqc_cmd->add_option("--out", vqc_out, "Model JSON path")->required();
  vqc_cmd->add_option("--metrics", vqc_metrics, "Metrics JSON path (default stdout)");

  // train-svm -----------------------------------------------------------------
  auto* svm_cmd = app.add_subcommand("train-svm", "Train a fidelity-kernel SVM");
  DataArgs svm_data;
  svm_data.attach(svm_cmd);
  std::string svm_form = "dual", svm_gamma = "100";
  double svm_c = 1.0;
  std::int64_t svm_shots = 0;
  std::uint64_t svm_seed = 0;
  int svm_reps = 2;
  std::string svm_out, svm_metrics;
  svm_cmd->add_option("--form", svm_form)->check(CLI::IsMember({"dual", "ls"}))->capture_default_str();
  svm_cmd->add_option("--C", svm_c, "Box constraint (dual)")->capture_default_str();
  svm_cmd->add_option("--gamma", svm_gamma, "Regularisation (ls), or inf")->capture_default_str();
  svm_cmd->add_option("--shots", svm_shots, "0 = exact kernel")->capture_default_str();
  svm_cmd->add_option("--seed", svm_seed)->capture_default_str();
  svm_cmd->add_option("--reps", svm_reps, "Feature-map repetitions")->capture_default_str();
  svm_cmd->add_option("--out", svm_out, "Model JSON path")->required();
  svm_cmd->add_option("--metrics", svm_metrics, "Metrics JSON path (default stdout)");

  // experiment ----------------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("experiment", "Run the full select/resample/train/evaluate protocol");
  std::string exp_config, exp_out;
  exp_cmd->add_option("--config", exp_config, "key = value config file; flags override it");
  exp_cmd->add_option("--out", exp_out, "Result JSON path (default stdout)");
  std::map<std::string, std::string> exp_flags;
  std::map<std::string, CLI::Option*> exp_opts;
  for (const auto& key : hqml::experiment_keys())
    exp_opts[key] = exp_cmd->add_option("--" + key, exp_flags[key]);

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e);
    } catch (const CLI::ParseError& e) {
      app.exit(e);
      return 2;
    }

    if (*embed_cmd) {
      const auto values = parse_list(embed_x);
      const hqml::FeatureVector x = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      const auto cfg = hqml::FeatureMapConfig::with_defaults(static_cast<int>(x.size()), embed_reps);
      const auto circuit = hqml::build_feature_map_circuit(x, cfg);
      hqml::StateVector s(cfg.n_qubits);
      s.apply(circuit);
      Json out = {{"n_qubits", cfg.n_qubits}, {"x", values}, {"feature_map", hqml::feature_map_to_json(cfg)}};
      if (embed_circuit) {
        Json lines = Json::array();
        std::istringstream text(hqml::format_circuit(circuit));
        for (std::string line; std::getline(text, line);) lines.push_back(line);
        out["circuit"] = lines;
      }
      out["amplitudes"] = hqml::amplitudes_to_json(s);
      Json probs = Json::object();
      for (const auto& [bits, p] : hqml::probabilities(s)) probs[bits] = p;
      out["probabilities"] = probs;
      emit(out, embed_out);
    } else if (*kernel_cmd) {
      const auto data = kernel_data.load();
      const auto scaling = hqml::fit_scaling(data.features);
      const auto cfg = hqml::FeatureMapConfig::with_defaults(static_cast<int>(data.dim()), kernel_reps);
      const auto k = hqml::kernel_matrix(hqml::scale_features(data.features, scaling), cfg,
                                         hqml::Shots::of(kernel_shots), kernel_seed);
      if (!kernel_scaling.empty()) hqml::write_json(kernel_scaling, hqml::scaling_to_json(scaling));
      if (kernel_out.empty()) {
        std::cout.precision(17);
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
          for (Eigen::Index j = 0; j < k.cols(); ++j) std::cout << (j ? "," : "") << k(i, j);
          std::cout << '\n';
        }
      } else {
        hqml::write_matrix_csv(kernel_out, k);
      }
    } else if (*select_cmd) {
      const auto data = select_data.load();
      const auto report =
          select_method == "tree"
              ? hqml::tree_importance(hqml::train_tree(data.features, data.labels, select_depth), data.rows())
              : hqml::boosted_importance(data.features, data.labels, select_rounds, select_lr);
      const auto keep = hqml::select_top_k(report, select_k);
      emit(hqml::importance_to_json(report, data.feature_names), select_report);
      if (!select_out.empty()) hqml::write_csv(select_out, data.select_columns(keep), select_data.label);
    } else if (*resample_cmd) {
      const auto data = resample_data.load();
      const auto in = hqml::LabeledSet::from(data);
      hqml::LabeledSet res;
      if (resample_method == "smote") res = hqml::smote_balance(in, resample_smote_k, resample_seed);
      else if (resample_method == "adasyn") res = hqml::adasyn_balance(in, resample_smote_k, resample_seed);
      else if (resample_method == "kmeans") res = hqml::kmeans_balance(in, resample_seed);
      else if (resample_method == "enn") res = hqml::enn_undersample(in, resample_enn_k).set;
      else res = hqml::smote_enn(in, resample_smote_k, resample_enn_k, resample_seed);
      const auto mask = res.synthetic_mask();
      hqml::write_csv(resample_out, res.to_dataset(data.feature_names), resample_data.label, &mask);
    } else if (*vqc_cmd) {
      const auto data = vqc_data.load();
      if (data.dim() != vqc_qubits)
        throw hqml::ConfigError("data has " + std::to_string(data.dim()) + " features but --qubits is " +
                                std::to_string(vqc_qubits) + "; run select-features first");
      vqc_tc.max_iters = vqc_iters;
      vqc_tc.shots = hqml::Shots::of(vqc_shots);
      vqc_tc.seed = vqc_seed;
      hqml::TrainHistory history;
      const auto model = hqml::train_vqc(data, hqml::FeatureMapConfig::with_defaults(vqc_qubits, vqc_reps), vqc_layers,
                                         vqc_tc, &history);
      auto model_json = hqml::vqc_model_to_json(model);
      model_json["feature_names"] = data.feature_names;
      hqml::write_json(vqc_out, model_json);
      emit({{"train_accuracy", history.train_accuracy},
            {"best_loss", history.best_loss},
            {"best_iteration", history.best_iteration},
            {"final_loss", history.loss.back()},
            {"iterations", vqc_iters},
            {"loss_history", history.loss}},
           vqc_metrics);
    } else if (*svm_cmd) {
      const auto data = svm_data.load();
      const auto scaling = hqml::fit_scaling(data.features);
      const auto cfg = hqml::FeatureMapConfig::with_defaults(static_cast<int>(data.dim()), svm_reps);
      const auto k = hqml::kernel_matrix(hqml::scale_features(data.features, scaling), cfg,
                                         hqml::Shots::of(svm_shots), svm_seed);
      Json model_json;
      hqml::Labels preds;
      if (svm_form == "dual") {
        const auto model = hqml::train_svm_dual(k, data.labels, svm_c);
        model_json = hqml::svm_model_to_json(model);
        preds = hqml::predict_kernel_rows(model, k);
      } else {
        hqml::ExperimentConfig parse;
        parse.set("gamma", svm_gamma);
        const auto model = hqml::train_ls_svm(k, data.labels, parse.ls_gamma);
        model_json = hqml::svm_model_to_json(model);
        preds = hqml::predict_kernel_rows(model, k);
      }
      model_json["feature_map"] = hqml::feature_map_to_json(cfg);
      model_json["scaling"] = hqml::scaling_to_json(scaling);
      model_json["train_labels"] = labels_json(data.labels);
      hqml::write_json(svm_out, model_json);
      emit({{"train_accuracy", hqml::accuracy(preds, data.labels)}, {"train_rows", data.rows()}}, svm_metrics);
    } else if (*exp_cmd) {
      hqml::ExperimentConfig cfg;
      if (!exp_config.empty())
        for (const auto& [key, value] : hqml::read_config_file(exp_config)) cfg.set(key, value);
      for (const auto& key : hqml::experiment_keys())
        if (exp_opts[key]->count() > 0) cfg.set(key, exp_flags[key]);
      if (cfg.data_path.empty()) throw hqml::ConfigError("no dataset given (--data or data = ... in the config file)");
      emit(hqml::run_experiment(cfg).to_json(), exp_out);
    }
  } catch (const hqml::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const hqml::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const hqml::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 4;
  }
  return 0;
}
