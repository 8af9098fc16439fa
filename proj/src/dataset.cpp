#include "hqml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hqml/error.hpp"
#include "hqml/rng.hpp"

namespace hqml {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  s = s.substr(first, last - first + 1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

// Largest-remainder allocation of round(total * fraction) across classes.
std::pair<Eigen::Index, Eigen::Index> allocate(Eigen::Index neg, Eigen::Index pos, double fraction) {
  const auto total = static_cast<Eigen::Index>(std::llround(static_cast<double>(neg + pos) * fraction));
  const double want_neg = static_cast<double>(neg) * fraction;
  const double want_pos = static_cast<double>(pos) * fraction;
  auto t_neg = static_cast<Eigen::Index>(std::floor(want_neg));
  auto t_pos = static_cast<Eigen::Index>(std::floor(want_pos));
  Eigen::Index left = total - t_neg - t_pos;
  const double r_neg = want_neg - static_cast<double>(t_neg);
  const double r_pos = want_pos - static_cast<double>(t_pos);
  const bool neg_first = r_neg >= r_pos;
  for (int pass = 0; pass < 2 && left > 0; ++pass) {
    const bool take_neg = (pass == 0) == neg_first;
    if (take_neg && t_neg < neg) { ++t_neg; --left; }
    if (!take_neg && t_pos < pos) { ++t_pos; --left; }
  }
  return {t_neg, t_pos};
}

std::vector<Eigen::Index> class_indices(const Labels& y, int label) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] == label) idx.push_back(i);
  return idx;
}

}  // namespace

void Dataset::validate() const {
  if (labels.size() != features.rows())
    throw DataError("label count " + std::to_string(labels.size()) + " differs from row count " +
                    std::to_string(features.rows()));
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw DataError("feature name count differs from column count");
  std::set<std::string> names(feature_names.begin(), feature_names.end());
  if (names.size() != feature_names.size()) throw DataError("feature names are not unique");
  for (Eigen::Index i = 0; i < labels.size(); ++i)
    if (labels[i] != 1 && labels[i] != -1) throw DataError("labels must be +1 or -1");
}

Dataset Dataset::select_rows(const std::vector<Eigen::Index>& idx) const {
  Dataset out;
  out.feature_names = feature_names;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(idx[r]);
    out.labels[static_cast<Eigen::Index>(r)] = labels[idx[r]];
  }
  return out;
}

Dataset Dataset::select_columns(const std::vector<int>& cols) const {
  Dataset out;
  out.labels = labels;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (cols[c] < 0 || cols[c] >= features.cols()) throw IndexError("column index out of range");
    out.features.col(static_cast<Eigen::Index>(c)) = features.col(cols[c]);
    out.feature_names.push_back(feature_names[static_cast<std::size_t>(cols[c])]);
  }
  return out;
}

Eigen::Index count_label(const Labels& y, int label) { return (y.array() == label).count(); }

int minority_label(const Labels& y) { return count_label(y, 1) <= count_label(y, -1) ? 1 : -1; }

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": missing header row");
  const auto header = split_line(line);
  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end())
    throw DataError(path.string() + ": no label column named '" + label_column + "'");
  const auto label_pos = static_cast<std::size_t>(label_it - header.begin());

  Dataset data;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != label_pos) data.feature_names.push_back(header[c]);

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    ++row;
    const auto cells = split_line(line);
    if (cells.size() != header.size())
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                      " cells, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v))
        throw DataError(path.string() + ": non-numeric cell '" + cells[c] + "' at row " + std::to_string(row) +
                        ", column " + header[c]);
      if (c == label_pos) {
        if (v == 1.0) {
          labels.push_back(1);
        } else if (v == 0.0 || v == -1.0) {
          labels.push_back(-1);
        } else {
          throw DataError(path.string() + ": label '" + cells[c] + "' at row " + std::to_string(row) +
                          " is not one of 0, 1, -1");
        }
      } else {
        values.push_back(v);
      }
    }
  }
  const auto d = static_cast<Eigen::Index>(data.feature_names.size());
  data.features.resize(static_cast<Eigen::Index>(row), d);
  for (std::size_t r = 0; r < row; ++r)
    for (Eigen::Index c = 0; c < d; ++c)
      data.features(static_cast<Eigen::Index>(r), c) = values[r * static_cast<std::size_t>(d) + static_cast<std::size_t>(c)];
  data.labels = Eigen::Map<const Labels>(labels.data(), static_cast<Eigen::Index>(labels.size()));
  data.validate();
  return data;
}

void write_csv(const std::filesystem::path& path, const Dataset& data, const std::string& label_column,
               const std::vector<bool>* synthetic) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (const auto& name : data.feature_names) out << name << ',';
  out << label_column;
  if (synthetic) out << ",synthetic";
  out << '\n';
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.dim(); ++j) out << data.features(i, j) << ',';
    out << data.labels[i];
    if (synthetic) out << ',' << ((*synthetic)[static_cast<std::size_t>(i)] ? 1 : 0);
    out << '\n';
  }
}

SplitIndices stratified_split_indices(const Labels& y, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw ArgumentError("test fraction must lie in (0, 1)");
  auto neg = class_indices(y, -1);
  auto pos = class_indices(y, 1);
  if (neg.size() < 2 || pos.size() < 2) throw ArgumentError("stratified split needs at least 2 rows per class");

  Rng rng(seed);
  rng.shuffle(neg.begin(), neg.end());
  rng.shuffle(pos.begin(), pos.end());
  const auto [t_neg, t_pos] = allocate(static_cast<Eigen::Index>(neg.size()),
                                       static_cast<Eigen::Index>(pos.size()), test_fraction);
  SplitIndices split;
  auto take = [&](const std::vector<Eigen::Index>& idx, Eigen::Index n_test) {
    for (std::size_t k = 0; k < idx.size(); ++k)
      (static_cast<Eigen::Index>(k) < n_test ? split.test : split.train).push_back(idx[k]);
  };
  take(neg, t_neg);
  take(pos, t_pos);
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, double test_fraction, std::uint64_t seed) {
  const auto split = stratified_split_indices(data.labels, test_fraction, seed);
  return {data.select_rows(split.train), data.select_rows(split.test)};
}

std::vector<Eigen::Index> stratified_subsample(const Labels& y, Eigen::Index count, std::uint64_t seed) {
  if (count < 1 || count > y.size()) throw ArgumentError("subsample size out of range");
  auto neg = class_indices(y, -1);
  auto pos = class_indices(y, 1);
  Rng rng(seed);
  rng.shuffle(neg.begin(), neg.end());
  rng.shuffle(pos.begin(), pos.end());
  const auto [n_neg, n_pos] = allocate(static_cast<Eigen::Index>(neg.size()), static_cast<Eigen::Index>(pos.size()),
                                       static_cast<double>(count) / static_cast<double>(y.size()));
  std::vector<Eigen::Index> out(neg.begin(), neg.begin() + n_neg);
  out.insert(out.end(), pos.begin(), pos.begin() + n_pos);
  std::sort(out.begin(), out.end());
  return out;
}

Dataset make_blobs(const BlobSpec& spec) {
  const auto d = spec.positive_center.size();
  if (spec.negative_center.size() != d) throw ShapeError("blob centres differ in dimension");
  Rng rng(spec.seed);
  Dataset data;
  for (Eigen::Index j = 0; j < d; ++j) data.feature_names.push_back("f" + std::to_string(j));
  const int n = spec.n_positive + spec.n_negative;
  data.features.resize(n, d);
  data.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    const bool positive = i < spec.n_positive;
    const auto& centre = positive ? spec.positive_center : spec.negative_center;
    const double sd = positive ? spec.positive_stddev : spec.negative_stddev;
    for (Eigen::Index j = 0; j < d; ++j) data.features(i, j) = centre[j] + sd * rng.normal();
    data.labels[i] = positive ? 1 : -1;
  }
  return data;
}

Dataset separable_fixture() {
  // negatives much tighter than positives: with equal spreads min/max scaling
  // makes the two classes mirror images and a real ansatz cannot split them
  BlobSpec spec;
  spec.n_positive = 20;
  spec.n_negative = 20;
  spec.positive_center = Eigen::Vector2d(1.0, 1.0);
  spec.negative_center = Eigen::Vector2d(-1.0, -1.0);
  spec.positive_stddev = 0.1;
  spec.negative_stddev = 0.02;
  spec.seed = 7;
  return make_blobs(spec);
}

Dataset imbalanced_fixture(std::uint64_t seed) {
  BlobSpec spec;
  spec.n_positive = 20;
  spec.n_negative = 80;
  spec.positive_center = Eigen::Vector2d(1.0, 1.0);
  spec.negative_center = Eigen::Vector2d(-1.0, -1.0);
  spec.positive_stddev = 0.3;
  spec.negative_stddev = 0.05;
  spec.seed = seed;
  return make_blobs(spec);
}

Dataset planted_signal_fixture(int rows, int noise_features, std::uint64_t seed, double noise) {
  Rng rng(seed);
  Dataset data;
  data.feature_names.push_back("signal");
  for (int j = 0; j < noise_features; ++j) data.feature_names.push_back("noise" + std::to_string(j));
  data.features.resize(rows, noise_features + 1);
  data.labels.resize(rows);
  for (int i = 0; i < rows; ++i) {
    const int label = (i % 2 == 0) ? 1 : -1;
    data.labels[i] = label;
    data.features(i, 0) = label + noise * rng.normal();
    for (int j = 1; j <= noise_features; ++j) data.features(i, j) = rng.normal();
  }
  return data;
}

}  // namespace hqml
