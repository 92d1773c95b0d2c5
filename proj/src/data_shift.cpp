#include "driftrules/data_shift.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftrules/kernels.hpp"
#include "driftrules/windowing.hpp"

namespace driftrules {

namespace {

void require_populations(const Matrix& prev, const Matrix& curr, const char* what) {
  if (prev.rows() == 0 || curr.rows() == 0) throw Error(std::string(what) + ": empty population");
  if (prev.cols() != curr.cols()) throw Error(std::string(what) + ": feature count mismatch");
}

void require_samples(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.empty() || b.empty()) throw Error(std::string(what) + ": empty sample");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double mean_l2(const Matrix& prev, const Matrix& curr) {
  require_populations(prev, curr, "mean_l2");
  const auto a = kernels::column_means(prev);
  const auto b = kernels::column_means(curr);
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
  return std::sqrt(sq);
}

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, "wasserstein_1d");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());

  // Walk the merged support; between consecutive points both CDFs are flat.
  std::size_t ia = 0, ib = 0;
  double total = 0.0;
  double x = std::min(sa.front(), sb.front());
  while (ia < sa.size() || ib < sb.size()) {
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    if (ia == sa.size() && ib == sb.size()) break;
    double next;
    if (ia == sa.size()) {
      next = sb[ib];
    } else if (ib == sb.size()) {
      next = sa[ia];
    } else {
      next = std::min(sa[ia], sb[ib]);
    }
    total += std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb) * (next - x);
    x = next;
  }
  return total;
}

double ks_2sample(std::span<const double> a, std::span<const double> b) {
  require_samples(a, b, "ks_2sample");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const auto na = static_cast<double>(sa.size());
  const auto nb = static_cast<double>(sb.size());
  std::size_t ia = 0, ib = 0;
  double sup = 0.0;
  while (ia < sa.size() || ib < sb.size()) {
    double x;
    if (ia == sa.size()) {
      x = sb[ib];
    } else if (ib == sb.size()) {
      x = sa[ia];
    } else {
      x = std::min(sa[ia], sb[ib]);
    }
    while (ia < sa.size() && sa[ia] <= x) ++ia;
    while (ib < sb.size() && sb[ib] <= x) ++ib;
    sup = std::max(sup, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
  }
  return sup;
}

double mean_wasserstein(const Matrix& prev, const Matrix& curr) {
  require_populations(prev, curr, "mean_wasserstein");
  return kernels::mean_over_columns(prev, curr, [](const std::vector<double>& a, const std::vector<double>& b) {
    return wasserstein_1d(a, b);
  });
}

double ks_mean(const Matrix& prev, const Matrix& curr) {
  require_populations(prev, curr, "ks_mean");
  return kernels::mean_over_columns(prev, curr, [](const std::vector<double>& a, const std::vector<double>& b) {
    return ks_2sample(a, b);
  });
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("roc_auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        rank_sum_pos += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw Error("roc_auc: both classes must be present");
  const auto np = static_cast<double>(n_pos);
  const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

std::optional<double> domain_auc(const Matrix& prev, const Matrix& curr, const DomainClassifierConfig& config,
                                 std::uint64_t seed) {
  require_populations(prev, curr, "domain_auc");
  if (prev.rows() < config.min_population || curr.rows() < config.min_population) return std::nullopt;

  const Matrix x = Matrix::concat(prev, curr);
  std::vector<int> y(x.rows(), 0);
  std::fill(y.begin() + static_cast<std::ptrdiff_t>(prev.rows()), y.end(), 1);
  std::vector<std::size_t> all(x.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> train, test;
  stratified_split(all, y, 1.0 - config.holdout_fraction, seed, train, test);

  const Matrix x_train = x.select_rows(train);
  std::vector<int> y_train(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) y_train[i] = y[train[i]];
  const auto forest = train_forest(x_train, y_train, config.forest, seed);

  std::vector<double> scores(test.size());
  std::vector<int> y_test(test.size());
  for (std::size_t i = 0; i < test.size(); ++i) {
    scores[i] = predict_proba_forest(forest, x.row(test[i]));
    y_test[i] = y[test[i]];
  }
  return roc_auc(scores, y_test);
}

ShiftMetrics compute_shift(const Matrix& prev, const Matrix& curr, const DomainClassifierConfig& config,
                           std::uint64_t seed) {
  ShiftMetrics s;
  s.mean_l2 = mean_l2(prev, curr);
  s.domain_auc = domain_auc(prev, curr, config, seed);
  s.mean_wasserstein = mean_wasserstein(prev, curr);
  s.ks_mean = ks_mean(prev, curr);
  return s;
}

}  // namespace driftrules
