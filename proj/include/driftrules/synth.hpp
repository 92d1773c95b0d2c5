#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftrules/ingest.hpp"

namespace driftrules {

/// One Gaussian population with axis-aligned covariance.
struct FamilySpec {
  std::string name;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::size_t samples_per_window = 200;
  bool benign = false;

  void validate(std::size_t min_samples_leaf = 1) const;
};

enum class DriftKind { none, sudden, gradual, importance_swap };

std::string to_string(DriftKind kind);
DriftKind parse_drift_kind(const std::string& s);

/// Per-window mean offsets applied to one designated family.
struct DriftSchedule {
  DriftKind kind = DriftKind::none;
  std::string family;
  std::vector<std::vector<double>> offsets;  // one per window
  std::size_t change_window = 0;             // sudden / importance_swap
  std::size_t swap_a = 0;
  std::size_t swap_b = 1;

  std::size_t n_windows() const { return offsets.size(); }
};

inline constexpr double kSwapTrueShift = 1.0;

DriftSchedule stationary_schedule(std::size_t n_windows, std::size_t n_features);

/// Offset 0 before `change_window`, `magnitude * direction` from it on.
/// `direction` is normalized; empty means equal weight on every feature.
DriftSchedule sudden_schedule(std::string family, std::size_t n_windows, std::size_t n_features, double magnitude,
                              std::size_t change_window, std::vector<double> direction = {});

/// delta_w = total * clamp((w - ramp_start) / (ramp_end - ramp_start), 0, 1).
/// The defaults (0, n_windows) give delta_w = (w / n) * total.
DriftSchedule gradual_schedule(std::string family, std::size_t n_windows, std::vector<double> total,
                               std::size_t ramp_start = 0, std::size_t ramp_end = 0);

/// Columns a and b of `family` trade places from `swap_window` on.
DriftSchedule swap_schedule(std::string family, std::size_t n_windows, std::size_t n_features,
                            std::size_t swap_window, std::size_t a, std::size_t b);

/// Ground-truth shift between windows t and t + 1.
double true_shift(const DriftSchedule& schedule, std::size_t t);
std::vector<double> true_shift_series(const DriftSchedule& schedule);

inline constexpr std::int64_t kDefaultEpoch = 1577836800;  // 2020-01-01T00:00:00Z

LabeledDataset generate(const std::vector<FamilySpec>& specs, const DriftSchedule& schedule, std::size_t n_windows,
                        double window_length_days, std::uint64_t seed, std::int64_t epoch = kDefaultEpoch);

/// A benign population plus `n_families` malicious ones whose means are
/// drawn from the seed; every std is 1.
std::vector<FamilySpec> default_families(std::size_t n_families, std::size_t n_features,
                                         std::size_t samples_per_window, std::uint64_t seed,
                                         double separation = 1.5);

nlohmann::json truth_json(const std::vector<FamilySpec>& specs, const DriftSchedule& schedule,
                          double window_length_days, std::uint64_t seed);

}  // namespace driftrules
