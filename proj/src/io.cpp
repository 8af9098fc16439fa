#include "hqml/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "hqml/error.hpp"

namespace hqml {

namespace {

Json vector_to_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

template <typename F>
auto parse_or_data_error(const char* what, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed ") + what + ": " + e.what());
  }
}

}  // namespace

Json scaling_to_json(const ScalingParams& p) {
  Json out = Json::object();
  for (Eigen::Index i = 0; i < p.dim(); ++i) out[std::to_string(i)] = {{"min", p.min[i]}, {"max", p.max[i]}};
  return out;
}

ScalingParams scaling_from_json(const Json& j) {
  return parse_or_data_error("scaling", [&] {
    ScalingParams p;
    const auto d = static_cast<Eigen::Index>(j.size());
    p.min.resize(d);
    p.max.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      const auto& e = j.at(std::to_string(i));
      p.min[i] = e.at("min").get<double>();
      p.max[i] = e.at("max").get<double>();
      if (p.min[i] > p.max[i]) throw DataError("scaling min exceeds max for feature " + std::to_string(i));
    }
    return p;
  });
}

Json feature_map_to_json(const FeatureMapConfig& cfg) {
  Json pairs = Json::array();
  for (const auto& [a, b] : cfg.entangler_pairs) pairs.push_back({a, b});
  return {{"n_qubits", cfg.n_qubits}, {"repetitions", cfg.repetitions}, {"entangler_pairs", pairs}};
}

FeatureMapConfig feature_map_from_json(const Json& j) {
  return parse_or_data_error("feature map", [&] {
    FeatureMapConfig cfg;
    cfg.n_qubits = j.at("n_qubits").get<int>();
    cfg.repetitions = j.at("repetitions").get<int>();
    for (const auto& p : j.at("entangler_pairs")) cfg.entangler_pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    cfg.validate();
    return cfg;
  });
}

Json vqc_model_to_json(const VqcModel& m) {
  return {{"feature_map", feature_map_to_json(m.feature_map)},
          {"scaling", scaling_to_json(m.scaling)},
          {"theta", vector_to_json(m.theta)},
          {"bias", m.bias},
          {"l", m.layers},
          {"n_qubits", m.n_qubits()}};
}

VqcModel vqc_model_from_json(const Json& j) {
  return parse_or_data_error("VQC model", [&] {
    VqcModel m;
    m.feature_map = feature_map_from_json(j.at("feature_map"));
    m.scaling = scaling_from_json(j.at("scaling"));
    m.theta = vector_from_json(j.at("theta"));
    m.bias = j.at("bias").get<double>();
    m.layers = j.at("l").get<int>();
    if (j.at("n_qubits").get<int>() != m.feature_map.n_qubits) throw DataError("n_qubits disagrees with feature map");
    m.validate();
    return m;
  });
}

Json svm_model_to_json(const SvmDualModel& m) {
  Json support = Json::array();
  for (auto i : m.support) support.push_back(i);
  return {{"type", "dual"}, {"alphas", vector_to_json(m.alphas)}, {"b", m.bias}, {"C", m.c}, {"support_indices", support}};
}

Json svm_model_to_json(const LsSvmModel& m) {
  Json support = Json::array();
  for (Eigen::Index i = 0; i < m.a.size(); ++i)
    if (m.a[i] != 0.0) support.push_back(i);
  Json gamma = std::isinf(m.gamma) ? Json("inf") : Json(m.gamma);
  return {{"type", "ls"}, {"a", vector_to_json(m.a)}, {"b", m.bias}, {"gamma", gamma}, {"support_indices", support}};
}

Json importance_to_json(const ImportanceReport& r, const std::vector<std::string>& names) {
  if (static_cast<Eigen::Index>(names.size()) != r.size()) throw ShapeError("feature name count differs from report size");
  std::vector<int> order(names.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return r.scores[a] > r.scores[b]; });
  Json out = Json::object();
  for (int i : order) out[names[static_cast<std::size_t>(i)]] = r.scores[i];
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << m(i, j);
    out << '\n';
  }
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw DataError(path.string() + ": non-numeric cell '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw DataError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_or_data_error("JSON file", [&] { return Json::parse(in); });
}

void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace hqml
