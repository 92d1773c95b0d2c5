#pragma once

#include <optional>

#include "driftrules/ruleset.hpp"

namespace driftrules {

struct ImportanceDrift {
  double cosine = 0.0;
  double pearson = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  /// Either vector had zero variance; pearson was set to 0.
  bool pearson_degenerate = false;
};

/// Structural drift between two rulesets. Importance fields are empty when
/// either ruleset is a single leaf.
struct DriftMetrics {
  std::optional<double> feature_cosine_similarity;
  std::optional<double> feature_pearson_correlation;
  std::optional<double> feature_l1;
  std::optional<double> feature_l2;
  double prediction_agreement = 0.0;
  double coverage_mean_diff = 0.0;
  double activation_stability = 0.0;
  double jaccard_cover = 0.0;
  bool degenerate = false;
};

ImportanceDrift importance_drift(const ImportanceVector& prev, const ImportanceVector& curr);

/// Fraction of rows of `x` on which both rulesets predict the same class.
double prediction_agreement(const Ruleset& prev, const Ruleset& curr, const Matrix& x);

/// Mean rule coverage of `curr` on `x_curr` minus that of `prev` on `x_prev`.
double coverage_mean_diff(const Ruleset& prev, const Matrix& x_prev, const Ruleset& curr, const Matrix& x_curr);

/// Cosine between the activation vectors of `prev` on the two populations.
double activation_stability(const Ruleset& prev, const Matrix& x_prev, const Matrix& x_curr);

/// Jaccard index of the rows covered by each ruleset's positive rules;
/// 1 when both sets are empty.
double jaccard_cover(const Ruleset& prev, const Ruleset& curr, const Matrix& x);

/// All metrics for one transition. `x_prev` and `x_curr` are the two
/// windows' populations (coverage and activation metrics); `x_eval` is the
/// shared population for agreement and Jaccard cover.
DriftMetrics compute_drift(const Ruleset& prev, const ImportanceVector& v_prev, const Ruleset& curr,
                           const ImportanceVector& v_curr, const Matrix& x_prev, const Matrix& x_curr,
                           const Matrix& x_eval);

double cosine_similarity(std::span<const double> a, std::span<const double> b);
/// Sample Pearson correlation; nullopt if either input has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

}  // namespace driftrules
