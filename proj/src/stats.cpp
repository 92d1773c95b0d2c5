#include "driftrules/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "driftrules/common.hpp"

namespace driftrules {

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = avg;
    i = j;
  }
  return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: length mismatch");
  if (x.size() < 3) throw Error("spearman: need at least 3 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto n = static_cast<double>(rx.size());
  // Average ranks always have mean (n + 1) / 2.
  const double mean = (n + 1.0) / 2.0;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean;
    const double dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false};
}

CorrelationResult lagged_correlation(std::span<const std::optional<double>> drift,
                                     std::span<const std::optional<double>> target, int lag) {
  if (lag < 0) throw Error("lagged_correlation: lag must be >= 0");
  std::vector<double> xs, ys;
  const auto k = static_cast<std::size_t>(lag);
  for (std::size_t t = 0; t < drift.size() && t + k < target.size(); ++t) {
    if (drift[t] && target[t + k]) {
      xs.push_back(*drift[t]);
      ys.push_back(*target[t + k]);
    }
  }
  if (xs.size() < 3) {
    throw Error("lagged_correlation: only " + std::to_string(xs.size()) + " overlapping pairs at lag " +
                std::to_string(lag) + " (need 3)");
  }
  const auto s = spearman(xs, ys);
  CorrelationResult r;
  r.lag = lag;
  r.rho = s.rho;
  r.degenerate = s.degenerate;
  r.n_pairs = xs.size();
  return r;
}

CellSummary summarize(std::vector<double> values) {
  CellSummary s;
  if (values.empty()) return s;
  s.rhos = values;
  const auto n = static_cast<double>(values.size());
  double sum = 0.0;
  for (const double v : values) sum += v;
  s.mean = sum / n;
  double sq = 0.0;
  for (const double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / n);
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 == 1 ? values[m] : (values[m - 1] + values[m]) / 2.0;
  return s;
}

AggregateSummary aggregate(std::span<const PairCorrelation> results) {
  std::map<CellKey, std::vector<double>> usable;
  AggregateSummary out;
  for (const auto& r : results) {
    out.cells.try_emplace(r.key, std::nullopt);
    if (r.result && !r.result->degenerate) usable[r.key].push_back(r.result->rho);
  }
  for (auto& [key, rhos] : usable) out.cells[key] = summarize(std::move(rhos));
  return out;
}

}  // namespace driftrules
