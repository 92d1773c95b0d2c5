#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

namespace driftrules {

struct SpearmanResult {
  double rho = 0.0;
  /// A rank vector had zero variance; rho is reported as 0.
  bool degenerate = false;
};

/// Fractional ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

struct CorrelationResult {
  std::string metric;
  std::string target;
  int lag = 0;
  double rho = 0.0;
  std::size_t n_pairs = 0;
  bool degenerate = false;
};

/// Spearman over the pairs (drift[t], target[t + lag]) where both exist.
CorrelationResult lagged_correlation(std::span<const std::optional<double>> drift,
                                     std::span<const std::optional<double>> target, int lag);

struct CellKey {
  std::string metric;
  std::string target;
  int lag = 0;

  auto operator<=>(const CellKey&) const = default;
};

struct CellSummary {
  double mean = 0.0;
  double median = 0.0;
  /// Population standard deviation (divisor n).
  double std = 0.0;
  std::vector<double> rhos;
};

/// Per (metric, target, lag) cell; cells with no usable result are absent
/// (nullopt) rather than zero.
struct AggregateSummary {
  std::map<CellKey, std::optional<CellSummary>> cells;
};

struct PairCorrelation {
  std::string pair;
  /// nullopt marks a cell that could not be computed for this pair.
  std::optional<CorrelationResult> result;
  CellKey key;
};

AggregateSummary aggregate(std::span<const PairCorrelation> results);

/// Summary of one list of values (mean, median, population std).
CellSummary summarize(std::vector<double> values);

}  // namespace driftrules
