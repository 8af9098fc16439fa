#include "hqml/resample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "hqml/error.hpp"
#include "hqml/rng.hpp"

namespace hqml {

namespace {

std::vector<Eigen::Index> rows_with_label(const Labels& y, int label) {
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (y[i] == label) out.push_back(i);
  return out;
}

Eigen::MatrixXd gather(const Eigen::MatrixXd& rows, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (std::size_t r = 0; r < idx.size(); ++r) out.row(static_cast<Eigen::Index>(r)) = rows.row(idx[r]);
  return out;
}

std::vector<std::vector<Eigen::Index>> neighbour_table(const Eigen::MatrixXd& pool, int k) {
  std::vector<std::vector<Eigen::Index>> out;
  out.reserve(static_cast<std::size_t>(pool.rows()));
  for (Eigen::Index i = 0; i < pool.rows(); ++i) out.push_back(nearest_neighbors(pool, i, k));
  return out;
}

Eigen::RowVectorXd interpolate(const Eigen::MatrixXd& pool, Eigen::Index a, Eigen::Index b, double lambda) {
  return pool.row(a) + lambda * (pool.row(b) - pool.row(a));
}

void require_both_classes(const Labels& y) {
  if (count_label(y, 1) == 0 || count_label(y, -1) == 0)
    throw ArgumentError("resampling needs both classes present");
}

LabeledSet append_synthetic(const LabeledSet& base, const SyntheticRows& syn, int label) {
  LabeledSet out;
  const auto n = base.size(), s = syn.rows.rows();
  out.rows.resize(n + s, base.rows.cols());
  out.rows.topRows(n) = base.rows;
  if (s > 0) out.rows.bottomRows(s) = syn.rows;
  out.labels.resize(n + s);
  out.labels.head(n) = base.labels;
  out.labels.tail(s).setConstant(label);
  out.provenance = base.provenance;
  out.provenance.resize(static_cast<std::size_t>(n + s), Provenance::Synthetic);
  return out;
}

LabeledSet subset(const LabeledSet& in, const std::vector<Eigen::Index>& idx) {
  LabeledSet out;
  out.rows = gather(in.rows, idx);
  out.labels.resize(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t r = 0; r < idx.size(); ++r) {
    out.labels[static_cast<Eigen::Index>(r)] = in.labels[idx[r]];
    out.provenance.push_back(in.provenance[static_cast<std::size_t>(idx[r])]);
  }
  return out;
}

}  // namespace

LabeledSet LabeledSet::from(const Dataset& data) { return from(data.features, data.labels); }

LabeledSet LabeledSet::from(Eigen::MatrixXd rows, Labels labels) {
  if (rows.rows() != labels.size()) throw ShapeError("row count differs from label count");
  LabeledSet s;
  s.provenance.assign(static_cast<std::size_t>(rows.rows()), Provenance::Original);
  s.rows = std::move(rows);
  s.labels = std::move(labels);
  return s;
}

Dataset LabeledSet::to_dataset(std::vector<std::string> feature_names) const {
  Dataset d;
  d.feature_names = std::move(feature_names);
  d.features = rows;
  d.labels = labels;
  return d;
}

std::vector<bool> LabeledSet::synthetic_mask() const {
  std::vector<bool> out;
  for (auto p : provenance) out.push_back(p == Provenance::Synthetic);
  return out;
}

std::vector<Eigen::Index> nearest_neighbors(const Eigen::MatrixXd& pool, Eigen::Index self, int k) {
  if (k < 1) throw ArgumentError("neighbour count must be >= 1");
  std::vector<std::pair<double, Eigen::Index>> d;
  d.reserve(static_cast<std::size_t>(pool.rows()));
  for (Eigen::Index j = 0; j < pool.rows(); ++j)
    if (j != self) d.emplace_back((pool.row(j) - pool.row(self)).squaredNorm(), j);
  const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), d.size());
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end());
  std::vector<Eigen::Index> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(d[i].second);
  return out;
}

SyntheticRows smote(const Eigen::MatrixXd& minority, int k, Eigen::Index n_synthetic, std::uint64_t seed) {
  if (k < 1) throw ArgumentError("SMOTE k must be >= 1");
  if (n_synthetic < 0) throw ArgumentError("synthetic count must be >= 0");
  SyntheticRows out;
  out.rows.resize(n_synthetic, minority.cols());
  if (n_synthetic == 0) return out;
  if (minority.rows() < 2) throw ArgumentError("SMOTE needs at least 2 minority rows");

  const auto table = neighbour_table(minority, k);
  Rng rng(seed);
  for (Eigen::Index s = 0; s < n_synthetic; ++s) {
    const auto a = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(minority.rows())));
    const auto& nbs = table[static_cast<std::size_t>(a)];
    const auto nb = nbs[rng.uniform_index(nbs.size())];
    out.rows.row(s) = interpolate(minority, a, nb, rng.uniform());
    out.parents.push_back({a, nb});
  }
  return out;
}

SyntheticRows adasyn(const Eigen::MatrixXd& rows, const Labels& labels, int k, std::uint64_t seed) {
  if (rows.rows() != labels.size()) throw ShapeError("row count differs from label count");
  if (k < 1) throw ArgumentError("ADASYN k must be >= 1");
  require_both_classes(labels);
  const int minority_y = minority_label(labels);
  const auto min_idx = rows_with_label(labels, minority_y);
  const auto m = static_cast<Eigen::Index>(min_idx.size());
  const Eigen::Index g = labels.size() - 2 * m;

  SyntheticRows out;
  out.rows.resize(g, rows.cols());
  if (g == 0) return out;
  if (m < 2) throw ArgumentError("ADASYN needs at least 2 minority rows");

  std::vector<double> ratio;
  for (auto i : min_idx) {
    const auto nbs = nearest_neighbors(rows, i, k);
    Eigen::Index majority = 0;
    for (auto j : nbs) majority += (labels[j] != minority_y);
    ratio.push_back(static_cast<double>(majority) / static_cast<double>(nbs.size()));
  }
  double total = std::accumulate(ratio.begin(), ratio.end(), 0.0);
  if (total == 0.0) {
    out.uniform_fallback = true;
    std::fill(ratio.begin(), ratio.end(), 1.0);
    total = static_cast<double>(m);
  }

  // Largest-remainder rounding so the counts add up to g exactly.
  std::vector<Eigen::Index> alloc(static_cast<std::size_t>(m));
  std::vector<std::pair<double, Eigen::Index>> remainder;
  Eigen::Index assigned = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double want = static_cast<double>(g) * ratio[static_cast<std::size_t>(i)] / total;
    alloc[static_cast<std::size_t>(i)] = static_cast<Eigen::Index>(std::floor(want));
    assigned += alloc[static_cast<std::size_t>(i)];
    remainder.emplace_back(want - std::floor(want), i);
  }
  std::stable_sort(remainder.begin(), remainder.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < g; ++r, ++assigned) ++alloc[static_cast<std::size_t>(remainder[r % remainder.size()].second)];

  const Eigen::MatrixXd minority = gather(rows, min_idx);
  const auto table = neighbour_table(minority, k);
  Rng rng(seed);
  Eigen::Index s = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& nbs = table[static_cast<std::size_t>(i)];
    for (Eigen::Index c = 0; c < alloc[static_cast<std::size_t>(i)]; ++c, ++s) {
      const auto nb = nbs[rng.uniform_index(nbs.size())];
      out.rows.row(s) = interpolate(minority, i, nb, rng.uniform());
      out.parents.push_back({i, nb});
    }
  }
  return out;
}

KMeansSelection kmeans_undersample(const Eigen::MatrixXd& majority, Eigen::Index target_count, std::uint64_t seed) {
  const auto n = majority.rows();
  if (target_count < 1) throw ArgumentError("k-means target count must be >= 1");
  if (target_count > n) throw ArgumentError("k-means target count exceeds the number of rows");
  const auto k = target_count;
  Rng rng(seed);

  // k-means++ seeding
  std::vector<Eigen::Index> seeds{static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::uint64_t>(n)))};
  Eigen::VectorXd d2 = (majority.rowwise() - majority.row(seeds[0])).rowwise().squaredNorm();
  while (static_cast<Eigen::Index>(seeds.size()) < k) {
    const double total = d2.sum();
    Eigen::Index pick = -1;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && u < acc) { pick = i; break; }
      }
      if (pick < 0)
        for (Eigen::Index i = n - 1; i >= 0 && pick < 0; --i)
          if (d2[i] > 0.0) pick = i;
    } else {
      for (Eigen::Index i = 0; i < n && pick < 0; ++i)
        if (std::find(seeds.begin(), seeds.end(), i) == seeds.end()) pick = i;
    }
    seeds.push_back(pick);
    d2 = d2.cwiseMin((majority.rowwise() - majority.row(pick)).rowwise().squaredNorm());
  }

  Eigen::MatrixXd centroids = gather(majority, seeds);
  std::vector<Eigen::Index> assign(static_cast<std::size_t>(n));
  auto assign_all = [&] {
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (Eigen::Index c = 0; c < k; ++c) {
        const double d = (majority.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = c; }
      }
      assign[static_cast<std::size_t>(i)] = best;
    }
  };

  for (int iter = 0; iter < 100; ++iter) {
    assign_all();
    Eigen::MatrixXd next = Eigen::MatrixXd::Zero(k, majority.cols());
    Eigen::VectorXi count = Eigen::VectorXi::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      next.row(assign[static_cast<std::size_t>(i)]) += majority.row(i);
      ++count[assign[static_cast<std::size_t>(i)]];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (Eigen::Index c = 0; c < k; ++c) {
      if (count[c] > 0) {
        next.row(c) /= count[c];
        continue;
      }
      // Empty cluster: move it onto the point farthest from its own centroid.
      Eigen::Index far = -1;
      double far_d = -1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double d = (majority.row(i) - centroids.row(assign[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) { far_d = d; far = i; }
      }
      taken[static_cast<std::size_t>(far)] = true;
      next.row(c) = majority.row(far);
    }
    const double shift = (next - centroids).rowwise().norm().maxCoeff();
    centroids = std::move(next);
    if (shift <= 1e-6) break;
  }
  assign_all();

  std::vector<bool> used(static_cast<std::size_t>(n), false);
  KMeansSelection out;
  for (Eigen::Index c = 0; c < k; ++c) {
    Eigen::Index best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int pass = 0; pass < 2 && best < 0; ++pass) {
      // first members of the cluster, then (empty cluster) any unused row
      for (Eigen::Index i = 0; i < n; ++i) {
        if (used[static_cast<std::size_t>(i)]) continue;
        if (pass == 0 && assign[static_cast<std::size_t>(i)] != c) continue;
        const double d = (majority.row(i) - centroids.row(c)).squaredNorm();
        if (d < best_d) { best_d = d; best = i; }
      }
    }
    used[static_cast<std::size_t>(best)] = true;
    out.kept.push_back(best);
  }
  std::sort(out.kept.begin(), out.kept.end());
  out.rows = gather(majority, out.kept);
  return out;
}

EnnResult enn_undersample(const LabeledSet& input, int k) {
  if (k < 1) throw ArgumentError("ENN k must be >= 1");
  if (input.size() <= k) throw ArgumentError("ENN needs more rows than neighbours");
  if (input.labels.size() != input.size() || static_cast<Eigen::Index>(input.provenance.size()) != input.size())
    throw ShapeError("labeled set is inconsistent");
  EnnResult out;
  for (Eigen::Index i = 0; i < input.size(); ++i) {
    int vote = 0;
    for (auto j : nearest_neighbors(input.rows, i, k)) vote += input.labels[j];
    const bool disagrees = (vote > 0 && input.labels[i] == -1) || (vote < 0 && input.labels[i] == 1);
    if (!disagrees) out.kept.push_back(i);
  }
  out.set = subset(input, out.kept);
  return out;
}

LabeledSet smote_balance(const LabeledSet& input, int k, std::uint64_t seed) {
  require_both_classes(input.labels);
  const int minority_y = minority_label(input.labels);
  const auto min_idx = rows_with_label(input.labels, minority_y);
  const auto deficit = input.size() - 2 * static_cast<Eigen::Index>(min_idx.size());
  return append_synthetic(input, smote(gather(input.rows, min_idx), k, deficit, seed), minority_y);
}

LabeledSet adasyn_balance(const LabeledSet& input, int k, std::uint64_t seed) {
  const auto syn = adasyn(input.rows, input.labels, k, seed);
  return append_synthetic(input, syn, minority_label(input.labels));
}

LabeledSet smote_enn(const LabeledSet& input, int smote_k, int enn_k, std::uint64_t seed) {
  return enn_undersample(smote_balance(input, smote_k, seed), enn_k).set;
}

LabeledSet kmeans_balance(const LabeledSet& input, std::uint64_t seed) {
  require_both_classes(input.labels);
  const int minority_y = minority_label(input.labels);
  const auto maj_idx = rows_with_label(input.labels, -minority_y);
  const auto min_idx = rows_with_label(input.labels, minority_y);
  const auto sel = kmeans_undersample(gather(input.rows, maj_idx), static_cast<Eigen::Index>(min_idx.size()), seed);
  std::vector<Eigen::Index> keep = min_idx;
  for (auto i : sel.kept) keep.push_back(maj_idx[static_cast<std::size_t>(i)]);
  std::sort(keep.begin(), keep.end());
  return subset(input, keep);
}

}  // namespace hqml
