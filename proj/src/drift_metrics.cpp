#include "driftrules/drift_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace driftrules {

namespace {

constexpr double kBoundSlack = 1e-9;

void require_population(const Matrix& x, const char* what) {
  if (x.rows() == 0) throw Error(std::string(what) + ": empty population");
}

// Per-row membership in the region covered by positive-class rules.
std::vector<bool> positive_region(const Ruleset& rs, const Matrix& x) {
  const auto hit = covering_rules(rs, x);
  std::vector<bool> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = hit[i] < rs.rules.size() && rs.rules[hit[i]].predicted == 1;
  return out;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw Error("cosine_similarity: zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("pearson: length mismatch");
  const auto n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

ImportanceDrift importance_drift(const ImportanceVector& prev, const ImportanceVector& curr) {
  if (prev.size() != curr.size()) throw Error("importance_drift: length mismatch");
  if (prev.size() < 2) throw Error("importance_drift: need at least 2 features");
  if (prev.degenerate || curr.degenerate) throw Error("importance_drift: degenerate importance vector");

  ImportanceDrift d;
  d.cosine = cosine_similarity(prev.weights, curr.weights);
  const auto r = pearson(prev.weights, curr.weights);
  d.pearson = r.value_or(0.0);
  d.pearson_degenerate = !r.has_value();
  double l1 = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) {
    const double delta = prev.weights[i] - curr.weights[i];
    l1 += std::abs(delta);
    sq += delta * delta;
  }
  d.l1 = l1;
  d.l2 = std::sqrt(sq);
  if (d.l1 > 2.0 + kBoundSlack || d.l2 > std::numbers::sqrt2 + kBoundSlack) {
    throw Error("importance_drift: distance exceeds the bound for normalized vectors");
  }
  return d;
}

double prediction_agreement(const Ruleset& prev, const Ruleset& curr, const Matrix& x) {
  require_population(x, "prediction_agreement");
  if (prev.n_features != curr.n_features) throw Error("prediction_agreement: rulesets differ in feature count");
  const auto hp = covering_rules(prev, x);
  const auto hc = covering_rules(curr, x);
  std::size_t same = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (hp[i] >= prev.rules.size() || hc[i] >= curr.rules.size()) {
      throw Error("prediction_agreement: row covered by no rule (corrupt ruleset)");
    }
    same += prev.rules[hp[i]].predicted == curr.rules[hc[i]].predicted ? 1 : 0;
  }
  return static_cast<double>(same) / static_cast<double>(x.rows());
}

double coverage_mean_diff(const Ruleset& prev, const Matrix& x_prev, const Ruleset& curr, const Matrix& x_curr) {
  require_population(x_prev, "coverage_mean_diff");
  require_population(x_curr, "coverage_mean_diff");
  auto mean_coverage = [](const Ruleset& rs, const Matrix& x) {
    const auto rates = activation_rates(rs, x);
    double sum = 0.0;
    for (const double r : rates) sum += r;
    return sum / static_cast<double>(rates.size());
  };
  return mean_coverage(curr, x_curr) - mean_coverage(prev, x_prev);
}

double activation_stability(const Ruleset& prev, const Matrix& x_prev, const Matrix& x_curr) {
  require_population(x_prev, "activation_stability");
  require_population(x_curr, "activation_stability");
  return cosine_similarity(activation_rates(prev, x_prev), activation_rates(prev, x_curr));
}

double jaccard_cover(const Ruleset& prev, const Ruleset& curr, const Matrix& x) {
  require_population(x, "jaccard_cover");
  const auto a = positive_region(prev, x);
  const auto b = positive_region(curr, x);
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    inter += (a[i] && b[i]) ? 1 : 0;
    uni += (a[i] || b[i]) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

DriftMetrics compute_drift(const Ruleset& prev, const ImportanceVector& v_prev, const Ruleset& curr,
                           const ImportanceVector& v_curr, const Matrix& x_prev, const Matrix& x_curr,
                           const Matrix& x_eval) {
  DriftMetrics m;
  if (v_prev.degenerate || v_curr.degenerate) {
    m.degenerate = true;
  } else {
    const auto d = importance_drift(v_prev, v_curr);
    m.feature_cosine_similarity = d.cosine;
    m.feature_pearson_correlation = d.pearson;
    m.feature_l1 = d.l1;
    m.feature_l2 = d.l2;
    m.degenerate = d.pearson_degenerate;
  }
  m.prediction_agreement = prediction_agreement(prev, curr, x_eval);
  m.coverage_mean_diff = coverage_mean_diff(prev, x_prev, curr, x_curr);
  m.activation_stability = activation_stability(prev, x_prev, x_curr);
  m.jaccard_cover = jaccard_cover(prev, curr, x_eval);
  return m;
}

}  // namespace driftrules
