#include "driftrules/kernels.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

namespace driftrules::kernels {

namespace {

double node_gini(std::size_t n0, std::size_t n1) {
  const std::size_t n = n0 + n1;
  if (n == 0) return 0.0;
  const double p0 = static_cast<double>(n0) / static_cast<double>(n);
  const double p1 = static_cast<double>(n1) / static_cast<double>(n);
  return 1.0 - p0 * p0 - p1 * p1;
}

// Midpoint of lo < hi; falls back to lo when it rounds up to hi.
double split_threshold(double lo, double hi) {
  const double mid = std::midpoint(lo, hi);
  return mid < hi ? mid : lo;
}

SplitCandidate best_for_feature(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                                std::size_t feature, std::size_t min_leaf) {
  std::vector<std::pair<double, int>> values(rows.size());
  std::size_t total[2] = {0, 0};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values[i] = {x.at(rows[i], feature), y[rows[i]]};
    ++total[y[rows[i]]];
  }
  std::sort(values.begin(), values.end());

  SplitCandidate best;
  std::size_t left[2] = {0, 0};
  const std::size_t n = values.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    ++left[values[i].second];
    if (values[i].first == values[i + 1].first) continue;
    const std::size_t n_left = i + 1;
    if (n_left < min_leaf || n - n_left < min_leaf) continue;
    auto c = make_candidate(static_cast<int>(feature), 0.0, left[0], left[1], total[0] - left[0],
                            total[1] - left[1]);
    if (c.beats(best)) {
      c.threshold = split_threshold(values[i].first, values[i + 1].first);
      best = c;
    }
  }
  return best;
}

}  // namespace

bool SplitCandidate::beats(const SplitCandidate& other) const {
  if (!valid()) return false;
  if (!other.valid()) return true;
  return quality_num * other.quality_den > other.quality_num * quality_den;
}

SplitCandidate make_candidate(int feature, double threshold, std::size_t l0, std::size_t l1, std::size_t r0,
                              std::size_t r1) {
  using u128 = unsigned __int128;
  const u128 nl = l0 + l1;
  const u128 nr = r0 + r1;
  SplitCandidate c;
  c.feature = feature;
  c.threshold = threshold;
  c.child_impurity = weighted_child_gini(l0, l1, r0, r1);
  c.quality_num = nr * (u128{l0} * l0 + u128{l1} * l1) + nl * (u128{r0} * r0 + u128{r1} * r1);
  c.quality_den = nl * nr;
  return c;
}

double weighted_child_gini(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1) {
  const auto nl = static_cast<double>(l0 + l1);
  const auto nr = static_cast<double>(r0 + r1);
  return (nl * node_gini(l0, l1) + nr * node_gini(r0, r1)) / (nl + nr);
}

SplitCandidate best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                          std::span<const std::size_t> candidate_features, std::size_t min_leaf) {
  const auto m = static_cast<std::ptrdiff_t>(candidate_features.size());
  std::vector<SplitCandidate> per_feature(candidate_features.size());
#pragma omp parallel for schedule(dynamic) if (rows.size() * candidate_features.size() > 4096)
  for (std::ptrdiff_t f = 0; f < m; ++f) {
    per_feature[static_cast<std::size_t>(f)] =
        best_for_feature(x, y, rows, candidate_features[static_cast<std::size_t>(f)], min_leaf);
  }
  // candidate_features is ascending, so a strict comparison keeps the lowest index on ties.
  SplitCandidate best;
  for (const auto& c : per_feature) {
    if (c.beats(best)) best = c;
  }
  return best;
}

std::vector<double> column_means(const Matrix& x) {
  const auto d = static_cast<std::ptrdiff_t>(x.cols());
  std::vector<double> means(x.cols(), 0.0);
#pragma omp parallel for if (x.rows() * x.cols() > 8192)
  for (std::ptrdiff_t j = 0; j < d; ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) sum += x.at(i, static_cast<std::size_t>(j));
    means[static_cast<std::size_t>(j)] = sum / static_cast<double>(x.rows());
  }
  return means;
}

namespace serial {

SplitCandidate best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                          std::span<const std::size_t> candidate_features, std::size_t min_leaf) {
  SplitCandidate best;
  for (const auto f : candidate_features) {
    std::vector<double> distinct;
    for (const auto r : rows) distinct.push_back(x.at(r, f));
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      const double t = split_threshold(distinct[k], distinct[k + 1]);
      std::size_t l[2] = {0, 0};
      std::size_t r[2] = {0, 0};
      for (const auto row : rows) {
        if (x.at(row, f) <= t) {
          ++l[y[row]];
        } else {
          ++r[y[row]];
        }
      }
      if (l[0] + l[1] < min_leaf || r[0] + r[1] < min_leaf) continue;
      const auto c = make_candidate(static_cast<int>(f), t, l[0], l[1], r[0], r[1]);
      if (c.beats(best)) best = c;
    }
  }
  return best;
}

std::vector<double> column_means(const Matrix& x) {
  std::vector<double> means(x.cols(), 0.0);
  for (std::size_t j = 0; j < x.cols(); ++j) {
    double sum = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) sum += x.at(i, j);
    means[j] = sum / static_cast<double>(x.rows());
  }
  return means;
}

}  // namespace serial

}  // namespace driftrules::kernels
