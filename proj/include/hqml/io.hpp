#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "hqml/featsel.hpp"
#include "hqml/featuremap.hpp"
#include "hqml/qsvm.hpp"
#include "hqml/statevector.hpp"
#include "hqml/vqc.hpp"

namespace hqml {

using Json = nlohmann::ordered_json;

/// [[re, im], ...] in basis-index order.
template <typename Real>
Json amplitudes_to_json(const BasicStateVector<Real>& s) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < s.dim(); ++i)
    out.push_back({static_cast<double>(s[i].real()), static_cast<double>(s[i].imag())});
  return out;
}

/// {"0": {"min": .., "max": ..}, ...}
Json scaling_to_json(const ScalingParams& p);
ScalingParams scaling_from_json(const Json& j);

Json feature_map_to_json(const FeatureMapConfig& cfg);
FeatureMapConfig feature_map_from_json(const Json& j);

/// {feature_map, scaling, theta, bias, l, n_qubits}
Json vqc_model_to_json(const VqcModel& m);
VqcModel vqc_model_from_json(const Json& j);

/// {type: "dual", alphas, b, C, support_indices}
Json svm_model_to_json(const SvmDualModel& m);
/// {type: "ls", a, b, gamma, support_indices}; infinite gamma is written as "inf".
Json svm_model_to_json(const LsSvmModel& m);

/// {feature_name: score}, descending score, ties by column order.
Json importance_to_json(const ImportanceReport& r, const std::vector<std::string>& names);

/// One row per line, comma separated, full precision.
void write_matrix_csv(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

}  // namespace hqml
