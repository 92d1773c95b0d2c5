#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "driftrules/common.hpp"

namespace driftrules {

/// Where a dataset came from and what was done to it since.
struct Provenance {
  std::string source;
  std::size_t duplicates_dropped = 0;
  std::size_t out_of_range_dropped = 0;
  std::vector<std::size_t> selected_columns;  // original column indices, empty = all
  std::vector<std::string> filters;           // human-readable log, in order applied
};

/// Columnar store of temporally tagged, labeled samples.
///
/// All parallel arrays have n_samples() entries. Values are not mutated after
/// construction; every transformation returns a new dataset.
class LabeledDataset {
 public:
  LabeledDataset() = default;
  explicit LabeledDataset(std::size_t n_features) : columns_(n_features) {}

  std::size_t n_samples() const { return ids_.size(); }
  std::size_t n_features() const { return columns_.size(); }
  bool empty() const { return ids_.empty(); }

  void add(std::string id, std::int64_t timestamp, int label, std::string family,
           std::span<const double> features);

  const std::string& id(std::size_t i) const { return ids_[i]; }
  std::int64_t timestamp(std::size_t i) const { return timestamps_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::string& family(std::size_t i) const { return families_[i]; }
  double value(std::size_t i, std::size_t j) const { return columns_[j][i]; }

  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  const std::vector<int>& labels() const { return labels_; }
  const std::vector<std::string>& families() const { return families_; }
  const std::vector<double>& column(std::size_t j) const { return columns_[j]; }

  /// Row indices ordered by (timestamp, row index).
  std::vector<std::size_t> sorted_index() const;

  /// New dataset holding the given rows in the given order.
  LabeledDataset subset(std::span<const std::size_t> rows) const;
  /// Same rows with replaced labels (one per row).
  LabeledDataset relabeled(std::vector<int> labels) const;

  /// Row-major copy of the selected rows, in the given order.
  Matrix rows(std::span<const std::size_t> rows) const;
  Matrix all_rows() const;

  Provenance& provenance() { return provenance_; }
  const Provenance& provenance() const { return provenance_; }

  /// Data equality (ids, timestamps, labels, families, bit-exact features).
  bool same_data(const LabeledDataset& other) const;

 private:
  std::vector<std::string> ids_;
  std::vector<std::int64_t> timestamps_;
  std::vector<int> labels_;
  std::vector<std::string> families_;
  std::vector<std::vector<double>> columns_;
  Provenance provenance_;
};

/// Univariate ANOVA-F feature ranking.
struct FeatureSelector {
  std::size_t k = 0;
  std::vector<double> scores;
  std::vector<std::size_t> selected_indices;  // ascending
};

inline constexpr double kAnovaEpsilon = 1e-12;

/// Parses the `sample_id,timestamp,label,family,f0..f{N-1}` schema.
LabeledDataset load_csv(const std::filesystem::path& path);
LabeledDataset parse_csv(std::istream& in, const std::string& source = "<stream>");

/// Writes the same schema; doubles use the shortest round-trip form.
void write_csv(const LabeledDataset& ds, const std::filesystem::path& path);
void write_csv(const LabeledDataset& ds, std::ostream& out);

/// Keeps the first occurrence of each sample_id.
LabeledDataset deduplicate(const LabeledDataset& ds);

/// Keeps rows with min_ts <= timestamp <= max_ts.
LabeledDataset filter_timestamps(const LabeledDataset& ds, std::int64_t min_ts, std::int64_t max_ts);

/// One-way ANOVA F statistic between the two label groups of one column.
double anova_f(std::span<const double> values, std::span<const int> labels);

/// Scores every feature on the rows listed in `fit_rows` (all rows if empty)
/// and keeps the k best; ties go to the lower column index.
FeatureSelector fit_select_k_best(const LabeledDataset& ds, std::size_t k,
                                  std::span<const std::size_t> fit_rows = {});

LabeledDataset apply_selector(const LabeledDataset& ds, const FeatureSelector& sel);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_double(double v);

}  // namespace driftrules
