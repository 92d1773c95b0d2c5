#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "driftrules/cart.hpp"
#include "driftrules/data_shift.hpp"
#include "driftrules/drift_metrics.hpp"
#include "driftrules/ingest.hpp"
#include "driftrules/ruleset.hpp"
#include "driftrules/stats.hpp"
#include "driftrules/windowing.hpp"

namespace driftrules {

enum class Scenario { fvb, fvf };
enum class WindowMode { fixed, dbscan, kmeans };
enum class PopulationMode { next_window_concat, current_window_concat };
/// Which timestamps clustering-based windowing sees.
enum class ClusterScope { pair, family };

struct WindowingSpec {
  WindowMode mode = WindowMode::fixed;
  double length_days = 60.0;
  ClusterParams cluster;
  ClusterScope scope = ClusterScope::pair;
  double split_fraction = 0.8;
};

struct FamilyPair {
  std::string positive;
  std::string negative;

  std::string id() const { return positive + "_vs_" + negative; }
  auto operator<=>(const FamilyPair&) const = default;
};

inline constexpr const char* kBenign = "benign";

struct ExperimentConfig {
  Scenario scenario = Scenario::fvb;
  /// FvB: families tested against benign (empty = every malicious family).
  /// FvF: families paired by medoid distance when `pairs` is empty.
  std::vector<std::string> families;
  std::vector<FamilyPair> pairs;
  WindowingSpec windowing;
  TreeParams tree;
  DomainClassifierConfig domain;
  std::size_t select_k = 0;  // 0 keeps every feature
  std::vector<int> lags{0, 1};
  PopulationMode population = PopulationMode::next_window_concat;
  std::uint64_t seed = 52;
  std::size_t medoid_sample_cap = 2000;

  /// Every problem found, not just the first.
  std::vector<std::string> validation_errors() const;
};

/// Metrics of one window-to-window transition (t, t + 1): rulesets R_t and
/// R_{t+1}, the accuracy of M_t on the test split of window t + 1, and the
/// shift between the positive-class populations of the two windows.
struct TransitionRecord {
  std::string pair;
  std::size_t t = 0;
  std::int64_t prev_start = 0, prev_end = 0, curr_start = 0, curr_end = 0;
  std::size_t n_prev = 0, n_curr = 0;
  std::size_t n_family_prev = 0, n_family_curr = 0;
  std::optional<double> accuracy;
  std::optional<double> accuracy_diff;
  std::optional<DriftMetrics> drift;
  std::optional<ShiftMetrics> shift;
  bool skipped = false;
  std::string skip_reason;
};

const std::vector<std::string>& drift_metric_names();
/// accuracy_diff followed by the four shift metrics.
const std::vector<std::string>& target_names();

std::optional<double> drift_value(const TransitionRecord& r, const std::string& metric);
std::optional<double> target_value(const TransitionRecord& r, const std::string& target);

struct PairResult {
  FamilyPair pair;
  WindowSeries windows;
  std::vector<std::optional<Ruleset>> rulesets;  // per window
  std::vector<std::optional<double>> accuracies;  // per window t: M_t on test(t + 1)
  std::vector<TransitionRecord> transitions;
  std::vector<PairCorrelation> correlations;
  std::vector<std::string> log;
};

struct ExperimentResult {
  std::vector<PairResult> pairs;  // sorted by pair id
  std::vector<std::pair<std::string, std::string>> failures;  // pair id, reason
  AggregateSummary summary;
};

/// Relabels `ds` for one pair: positive family -> 1, negative side -> 0,
/// everything else dropped. In FvB the negative side is every label-0 row.
LabeledDataset make_pair_dataset(const LabeledDataset& ds, Scenario scenario, const FamilyPair& pair);

/// Row minimizing the summed Euclidean distance to a seeded subsample
/// (at most `cap` rows) of `members`.
std::size_t family_medoid(const Matrix& x, std::span<const std::size_t> members, std::size_t cap, std::uint64_t seed);

/// Nearest-medoid pairing; each unordered pair appears once, ordered as in
/// `families`.
std::vector<FamilyPair> select_fvf_pairs(const LabeledDataset& ds, const std::vector<std::string>& families,
                                         std::size_t cap = 2000, std::uint64_t seed = 52);

/// Malicious family tags in sorted order.
std::vector<std::string> malicious_families(const LabeledDataset& ds);

WindowSeries build_windows(const LabeledDataset& ds_pair, const ExperimentConfig& config);

PairResult run_pair(const LabeledDataset& ds_pair, const ExperimentConfig& config, const FamilyPair& pair);

/// Per-pair lagged correlations of every drift metric against every target.
std::vector<PairCorrelation> correlate_pair(const std::string& pair_id, const std::vector<TransitionRecord>& records,
                                            const std::vector<int>& lags);

std::vector<FamilyPair> resolve_pairs(const LabeledDataset& ds, const ExperimentConfig& config);

ExperimentResult run_experiment(const LabeledDataset& ds, const ExperimentConfig& config);

/// Optional feature selection, fit on the union of per-window training
/// splits of the full dataset.
LabeledDataset prepare_dataset(const LabeledDataset& ds, const ExperimentConfig& config);

void write_transitions_csv(const ExperimentResult& result, std::ostream& out);
void write_correlations_csv(const ExperimentResult& result, std::ostream& out);
nlohmann::json summary_to_json(const AggregateSummary& summary);

/// transitions.csv, correlations.csv and rulesets/ under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

std::string to_string(Scenario s);
std::string to_string(WindowMode m);
std::string to_string(PopulationMode m);
std::string to_string(ClusterScope s);

}  // namespace driftrules
