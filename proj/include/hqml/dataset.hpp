#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace hqml {

/// Binary labels, each +1 or -1.
using Labels = Eigen::VectorXi;

struct Dataset {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;  // rows x d
  Labels labels;

  Eigen::Index rows() const { return features.rows(); }
  Eigen::Index dim() const { return features.cols(); }

  /// Throws DataError unless the shape invariants hold.
  void validate() const;

  Dataset select_rows(const std::vector<Eigen::Index>& idx) const;
  Dataset select_columns(const std::vector<int>& cols) const;
};

Eigen::Index count_label(const Labels& y, int label);

/// The less frequent label; +1 on a tie.
int minority_label(const Labels& y);

/// Reads a CSV with a header row. Every column except `label_column` is parsed
/// as a real feature. Labels 0/1 map to -1/+1, and -1/+1 pass through.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = "label");

/// Writes features, then the label column (+1/-1), then an optional
/// `synthetic` provenance column (0/1).
void write_csv(const std::filesystem::path& path, const Dataset& data,
               const std::string& label_column = "label",
               const std::vector<bool>* synthetic = nullptr);

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};

/// Per-class seeded shuffle, then the first t_c shuffled rows of class c go to
/// test. t_c comes from largest-remainder rounding of c_count * fraction so
/// the total is round(rows * fraction); remainder ties go to label -1 first.
SplitIndices stratified_split_indices(const Labels& y, double test_fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Stratified random subset of `count` rows (same allocation rule as the split).
std::vector<Eigen::Index> stratified_subsample(const Labels& y, Eigen::Index count, std::uint64_t seed);

// Synthetic fixtures ----------------------------------------------------------

struct BlobSpec {
  int n_positive = 20;
  int n_negative = 20;
  Eigen::VectorXd positive_center = Eigen::VectorXd::Constant(2, 1.0);
  Eigen::VectorXd negative_center = Eigen::VectorXd::Constant(2, -1.0);
  double positive_stddev = 0.3;
  double negative_stddev = 0.3;
  std::uint64_t seed = 7;
};

/// Two isotropic Gaussian blobs; positives first, then negatives.
Dataset make_blobs(const BlobSpec& spec);

/// The bundled 40-point, two-feature, separable fixture.
Dataset separable_fixture();

/// The bundled 1:4 imbalanced two-blob fixture (positives are the minority).
Dataset imbalanced_fixture(std::uint64_t seed = 11);

/// Feature 0 carries the label (label + N(0, noise)), the rest are N(0, 1).
Dataset planted_signal_fixture(int rows, int noise_features, std::uint64_t seed, double noise = 0.5);

}  // namespace hqml
