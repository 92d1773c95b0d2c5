#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driftrules/ingest.hpp"

namespace driftrules {

inline constexpr std::int64_t kSecondsPerDay = 86400;

struct Window {
  std::size_t index = 0;
  std::int64_t start_ts = 0;  // inclusive
  std::int64_t end_ts = 0;    // inclusive
  std::vector<std::size_t> members;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;

  bool empty() const { return members.empty(); }
};

/// Ordered, disjoint temporal windows over the rows of one dataset.
struct WindowSeries {
  std::vector<Window> windows;
  std::vector<std::size_t> noise;  // rows assigned to no window

  std::size_t size() const { return windows.size(); }
};

enum class ClusterAlgorithm { dbscan, kmeans };

struct ClusterParams {
  ClusterAlgorithm algorithm = ClusterAlgorithm::dbscan;
  double eps_days = 4.0;
  std::size_t min_samples = 500;
  std::size_t k = 4;

  void validate() const;
};

/// Label-stratified shuffle split of `members`; both outputs ascending.
void stratified_split(std::span<const std::size_t> members, std::span<const int> labels,
                      double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test);

/// Calendar windows of `window_length_days`, anchored at the earliest timestamp.
WindowSeries fixed_windows(const LabeledDataset& ds, double window_length_days, double split_fraction,
                           std::uint64_t seed);

/// Cluster labels for 1-D points: -1 marks noise, clusters numbered in
/// ascending timestamp order.
std::vector<int> dbscan_1d(std::span<const std::int64_t> points, double eps, std::size_t min_samples);

/// Lloyd's algorithm in 1-D with quantile initialization. Returns per-point
/// cluster ids ordered by center; empty clusters are dropped.
std::vector<int> kmeans_1d(std::span<const std::int64_t> points, std::size_t k, std::size_t max_iter = 300);

WindowSeries dbscan_windows(const LabeledDataset& ds, const ClusterParams& params, double split_fraction,
                            std::uint64_t seed);
WindowSeries kmeans_windows(const LabeledDataset& ds, const ClusterParams& params, double split_fraction,
                            std::uint64_t seed);

/// Builds windows from a per-row cluster assignment (-1 = noise).
WindowSeries windows_from_clusters(const LabeledDataset& ds, std::span<const int> cluster_of_row,
                                   double split_fraction, std::uint64_t seed);

/// Clusters the timestamps of `cluster_rows` only, then gives each window
/// every row of `ds` falling inside that cluster's span.
WindowSeries cluster_windows_on_subset(const LabeledDataset& ds, std::span<const std::size_t> cluster_rows,
                                       const ClusterParams& params, double split_fraction,
                                       std::uint64_t seed);

/// `row_index,window_index,role` with role in {train,test,noise}.
void write_window_assignments(const WindowSeries& series, std::ostream& out);

}  // namespace driftrules
