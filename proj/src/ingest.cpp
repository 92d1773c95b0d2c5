#include "driftrules/ingest.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_set>

namespace driftrules {

namespace {

constexpr std::string_view kFixedColumns[] = {"sample_id", "timestamp", "label", "family"};

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void row_error(const std::string& source, std::size_t row, const std::string& what) {
  throw Error(source + ": row " + std::to_string(row) + ": " + what);
}

}  // namespace

void LabeledDataset::add(std::string id, std::int64_t timestamp, int label, std::string family,
                         std::span<const double> features) {
  if (features.size() != columns_.size()) {
    throw Error("sample " + id + ": expected " + std::to_string(columns_.size()) + " features, got " +
                std::to_string(features.size()));
  }
  ids_.push_back(std::move(id));
  timestamps_.push_back(timestamp);
  labels_.push_back(label);
  families_.push_back(std::move(family));
  for (std::size_t j = 0; j < features.size(); ++j) columns_[j].push_back(features[j]);
}

std::vector<std::size_t> LabeledDataset::sorted_index() const {
  std::vector<std::size_t> idx(n_samples());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return timestamps_[a] < timestamps_[b]; });
  return idx;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out(n_features());
  out.provenance_ = provenance_;
  out.ids_.reserve(rows.size());
  for (auto& c : out.columns_) c.reserve(rows.size());
  for (const auto r : rows) {
    out.ids_.push_back(ids_[r]);
    out.timestamps_.push_back(timestamps_[r]);
    out.labels_.push_back(labels_[r]);
    out.families_.push_back(families_[r]);
    for (std::size_t j = 0; j < columns_.size(); ++j) out.columns_[j].push_back(columns_[j][r]);
  }
  return out;
}

LabeledDataset LabeledDataset::relabeled(std::vector<int> labels) const {
  if (labels.size() != n_samples()) throw Error("relabeled: label count mismatch");
  LabeledDataset out = *this;
  out.labels_ = std::move(labels);
  return out;
}

Matrix LabeledDataset::rows(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), n_features());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < columns_.size(); ++j) out.at(i, j) = columns_[j][rows[i]];
  }
  return out;
}

Matrix LabeledDataset::all_rows() const {
  std::vector<std::size_t> idx(n_samples());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return rows(idx);
}

bool LabeledDataset::same_data(const LabeledDataset& other) const {
  if (ids_ != other.ids_ || timestamps_ != other.timestamps_ || labels_ != other.labels_ ||
      families_ != other.families_ || columns_.size() != other.columns_.size()) {
    return false;
  }
  for (std::size_t j = 0; j < columns_.size(); ++j) {
    const auto& a = columns_[j];
    const auto& b = other.columns_[j];
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    }
  }
  return true;
}

LabeledDataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_csv(in, path.string());
}

LabeledDataset parse_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw Error(source + ": missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split_commas(line);
  if (header.size() < 4) throw Error(source + ": header must start with sample_id,timestamp,label,family");
  for (std::size_t i = 0; i < 4; ++i) {
    if (header[i] != kFixedColumns[i]) {
      throw Error(source + ": header column " + std::to_string(i + 1) + " must be '" +
                  std::string(kFixedColumns[i]) + "', found '" + std::string(header[i]) + "'");
    }
  }
  const std::size_t n_features = header.size() - 4;
  for (std::size_t j = 0; j < n_features; ++j) {
    const std::string expected = "f" + std::to_string(j);
    if (header[4 + j] != expected) {
      throw Error(source + ": header column " + std::to_string(5 + j) + " must be '" + expected +
                  "', found '" + std::string(header[4 + j]) + "'");
    }
  }

  LabeledDataset ds(n_features);
  ds.provenance().source = source;
  std::vector<double> features(n_features);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size()) {
      row_error(source, row, "expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(fields.size()));
    }
    if (fields[0].empty()) row_error(source, row, "empty sample_id");

    std::int64_t ts = 0;
    {
      const auto f = fields[1];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), ts);
      if (ec != std::errc{} || ptr != f.data() + f.size() || ts < 0) {
        row_error(source, row, "unparseable timestamp '" + std::string(f) + "'");
      }
    }
    int label = 0;
    if (fields[2] == "0") {
      label = 0;
    } else if (fields[2] == "1") {
      label = 1;
    } else {
      row_error(source, row, "label must be 0 or 1, found '" + std::string(fields[2]) + "'");
    }
    for (std::size_t j = 0; j < n_features; ++j) {
      const auto f = fields[4 + j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
        row_error(source, row, "non-finite or unparseable value '" + std::string(f) + "' in f" +
                                   std::to_string(j));
      }
      features[j] = v;
    }
    ds.add(std::string(fields[0]), ts, label, std::string(fields[3]), features);
  }
  return ds;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw Error("format_double failed");
  return std::string(buf, ptr);
}

void write_csv(const LabeledDataset& ds, std::ostream& out) {
  out << "sample_id,timestamp,label,family";
  for (std::size_t j = 0; j < ds.n_features(); ++j) out << ",f" << j;
  out << '\n';
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    out << ds.id(i) << ',' << ds.timestamp(i) << ',' << ds.label(i) << ',' << ds.family(i);
    for (std::size_t j = 0; j < ds.n_features(); ++j) out << ',' << format_double(ds.value(i, j));
    out << '\n';
  }
}

void write_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(ds, out);
  if (!out) throw Error("write failed: " + path.string());
}

LabeledDataset deduplicate(const LabeledDataset& ds) {
  std::unordered_set<std::string_view> seen;
  std::vector<std::size_t> keep;
  keep.reserve(ds.n_samples());
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    if (seen.insert(ds.id(i)).second) keep.push_back(i);
  }
  auto out = ds.subset(keep);
  const std::size_t dropped = ds.n_samples() - keep.size();
  out.provenance().duplicates_dropped += dropped;
  out.provenance().filters.push_back("deduplicate: dropped " + std::to_string(dropped));
  return out;
}

LabeledDataset filter_timestamps(const LabeledDataset& ds, std::int64_t min_ts, std::int64_t max_ts) {
  if (min_ts > max_ts) throw Error("filter_timestamps: min_ts > max_ts");
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    if (ds.timestamp(i) >= min_ts && ds.timestamp(i) <= max_ts) keep.push_back(i);
  }
  auto out = ds.subset(keep);
  const std::size_t dropped = ds.n_samples() - keep.size();
  out.provenance().out_of_range_dropped += dropped;
  out.provenance().filters.push_back("filter_timestamps [" + std::to_string(min_ts) + ", " +
                                     std::to_string(max_ts) + "]: dropped " + std::to_string(dropped));
  return out;
}

double anova_f(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) throw Error("anova_f: length mismatch");
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum[labels[i]] += values[i];
    ++count[labels[i]];
  }
  if (count[0] < 2 || count[1] < 2) throw Error("anova_f: each class needs at least 2 samples");
  const std::size_t n = count[0] + count[1];
  const double mean[2] = {sum[0] / static_cast<double>(count[0]), sum[1] / static_cast<double>(count[1])};
  const double grand = (sum[0] + sum[1]) / static_cast<double>(n);

  double ss_within = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean[labels[i]];
    ss_within += d * d;
  }
  double ss_between = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double d = mean[c] - grand;
    ss_between += static_cast<double>(count[c]) * d * d;
  }
  const double ms_between = ss_between;  // df = 1
  const double ms_within = ss_within / static_cast<double>(n - 2);
  return ms_between / (ms_within + kAnovaEpsilon);
}

FeatureSelector fit_select_k_best(const LabeledDataset& ds, std::size_t k,
                                  std::span<const std::size_t> fit_rows) {
  if (k < 1 || k > ds.n_features()) {
    throw Error("select_k_best: k=" + std::to_string(k) + " out of range [1, " +
                std::to_string(ds.n_features()) + "]");
  }
  std::vector<std::size_t> rows(fit_rows.begin(), fit_rows.end());
  if (rows.empty()) {
    rows.resize(ds.n_samples());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  }
  std::vector<int> labels(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = ds.label(rows[i]);

  FeatureSelector sel;
  sel.k = k;
  sel.scores.resize(ds.n_features());
  std::vector<double> values(rows.size());
  for (std::size_t j = 0; j < ds.n_features(); ++j) {
    const auto& col = ds.column(j);
    for (std::size_t i = 0; i < rows.size(); ++i) values[i] = col[rows[i]];
    sel.scores[j] = anova_f(values, labels);
  }

  std::vector<std::size_t> order(ds.n_features());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sel.scores[a] > sel.scores[b]; });
  sel.selected_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(sel.selected_indices.begin(), sel.selected_indices.end());
  return sel;
}

LabeledDataset apply_selector(const LabeledDataset& ds, const FeatureSelector& sel) {
  for (const auto j : sel.selected_indices) {
    if (j >= ds.n_features()) {
      throw Error("apply_selector: column " + std::to_string(j) + " out of range (" +
                  std::to_string(ds.n_features()) + " features)");
    }
  }
  LabeledDataset out(sel.selected_indices.size());
  std::vector<double> row(sel.selected_indices.size());
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    for (std::size_t j = 0; j < sel.selected_indices.size(); ++j) row[j] = ds.value(i, sel.selected_indices[j]);
    out.add(ds.id(i), ds.timestamp(i), ds.label(i), ds.family(i), row);
  }
  auto& prov = out.provenance();
  prov = ds.provenance();
  if (prov.selected_columns.empty()) {
    prov.selected_columns = sel.selected_indices;
  } else {
    std::vector<std::size_t> composed;
    for (const auto j : sel.selected_indices) composed.push_back(prov.selected_columns[j]);
    prov.selected_columns = std::move(composed);
  }
  prov.filters.push_back("select_k_best: kept " + std::to_string(sel.selected_indices.size()) + " of " +
                         std::to_string(ds.n_features()));
  return out;
}

}  // namespace driftrules
