#pragma once

#include <optional>
#include <span>
#include <vector>

#include "driftrules/cart.hpp"

namespace driftrules {

struct ShiftMetrics {
  double mean_l2 = 0.0;
  /// Absent when either population is below the domain classifier minimum.
  std::optional<double> domain_auc;
  double mean_wasserstein = 0.0;
  double ks_mean = 0.0;
};

struct DomainClassifierConfig {
  ForestParams forest;
  double holdout_fraction = 0.3;
  std::size_t min_population = 20;
};

/// Euclidean distance between the column means of two populations.
double mean_l2(const Matrix& prev, const Matrix& curr);

/// Exact W1 between two empirical distributions (integral of |F_a - F_b|).
double wasserstein_1d(std::span<const double> a, std::span<const double> b);
double mean_wasserstein(const Matrix& prev, const Matrix& curr);

/// Two-sample Kolmogorov-Smirnov statistic, sup |F_a - F_b|.
double ks_2sample(std::span<const double> a, std::span<const double> b);
double ks_mean(const Matrix& prev, const Matrix& curr);

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores
/// count one half. Labels are 0/1 and both must occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// AUC of a forest trained to tell `prev` (class 0) from `curr` (class 1),
/// measured on a stratified holdout. nullopt if a population is too small.
std::optional<double> domain_auc(const Matrix& prev, const Matrix& curr, const DomainClassifierConfig& config,
                                 std::uint64_t seed);

ShiftMetrics compute_shift(const Matrix& prev, const Matrix& curr, const DomainClassifierConfig& config,
                           std::uint64_t seed);

}  // namespace driftrules
