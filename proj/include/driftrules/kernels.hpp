#pragma once

#include <limits>
#include <span>
#include <vector>

#include "driftrules/common.hpp"

// Data-parallel inner loops. Each kernel has an OpenMP version used by the
// library and a plain serial reference under `serial::` that tests compare
// against and the benchmark times.

namespace driftrules::kernels {

struct SplitCandidate {
  int feature = -1;
  double threshold = 0.0;
  /// Size-weighted Gini of the two children; lower is better.
  double child_impurity = std::numeric_limits<double>::infinity();
  /// Split quality (l0^2 + l1^2)/nl + (r0^2 + r1^2)/nr as an exact
  /// fraction; higher is better.
  unsigned __int128 quality_num = 0;
  unsigned __int128 quality_den = 0;

  bool valid() const { return feature >= 0; }
  /// Strictly better than `other`; equal splits tie exactly.
  bool beats(const SplitCandidate& other) const;
};

SplitCandidate make_candidate(int feature, double threshold, std::size_t l0, std::size_t l1, std::size_t r0,
                              std::size_t r1);

/// Size-weighted child Gini, (n_l*G_l + n_r*G_r) / n.
double weighted_child_gini(std::size_t l0, std::size_t l1, std::size_t r0, std::size_t r1);

/// Best `x[f] <= t` split over `candidate_features` for the multiset `rows`.
/// Thresholds are midpoints of consecutive distinct values; both sides must
/// hold at least `min_leaf` rows. Ties go to the lower feature, then the
/// lower threshold.
SplitCandidate best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                          std::span<const std::size_t> candidate_features, std::size_t min_leaf);

std::vector<double> column_means(const Matrix& x);

/// Mean over columns of fn(column_a, column_b). Per-column results are
/// summed in column order, so the value is independent of thread count.
template <typename Fn>
double mean_over_columns(const Matrix& a, const Matrix& b, Fn fn) {
  const auto d = static_cast<std::ptrdiff_t>(a.cols());
  std::vector<double> per(a.cols(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t j = 0; j < d; ++j) {
    per[static_cast<std::size_t>(j)] = fn(a.column(static_cast<std::size_t>(j)), b.column(static_cast<std::size_t>(j)));
  }
  double sum = 0.0;
  for (const double v : per) sum += v;
  return sum / static_cast<double>(a.cols());
}

namespace serial {

/// Brute force: every candidate threshold recounts both sides from scratch.
SplitCandidate best_split(const Matrix& x, std::span<const int> y, std::span<const std::size_t> rows,
                          std::span<const std::size_t> candidate_features, std::size_t min_leaf);

std::vector<double> column_means(const Matrix& x);

template <typename Fn>
double mean_over_columns(const Matrix& a, const Matrix& b, Fn fn) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.cols(); ++j) sum += fn(a.column(j), b.column(j));
  return sum / static_cast<double>(a.cols());
}

}  // namespace serial

}  // namespace driftrules::kernels
