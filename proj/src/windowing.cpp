#include "driftrules/windowing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

namespace driftrules {

void ClusterParams::validate() const {
  if (!(eps_days > 0.0)) throw Error("cluster params: eps_days must be > 0");
  if (min_samples < 1) throw Error("cluster params: min_samples must be >= 1");
  if (k < 1) throw Error("cluster params: k must be >= 1");
}

void stratified_split(std::span<const std::size_t> members, std::span<const int> labels,
                      double train_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                      std::vector<std::size_t>& test) {
  train.clear();
  test.clear();
  for (int cls = 0; cls < 2; ++cls) {
    std::vector<std::size_t> group;
    for (const auto m : members) {
      if (labels[m] == cls) group.push_back(m);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls)));
    rng.shuffle(group);
    const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(group.size())));
    train.insert(train.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(n_train));
    test.insert(test.end(), group.begin() + static_cast<std::ptrdiff_t>(n_train), group.end());
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
}

namespace {

void check_split_fraction(double f) {
  if (!(f > 0.0 && f < 1.0)) throw Error("split fraction must lie in (0, 1)");
}

void assign_splits(const LabeledDataset& ds, WindowSeries& series, double split_fraction, std::uint64_t seed) {
  for (auto& w : series.windows) {
    std::sort(w.members.begin(), w.members.end());
    stratified_split(w.members, ds.labels(), split_fraction, derive_seed(seed, w.index), w.train, w.test);
  }
}

}  // namespace

WindowSeries fixed_windows(const LabeledDataset& ds, double window_length_days, double split_fraction,
                           std::uint64_t seed) {
  if (ds.empty()) throw Error("fixed_windows: empty dataset");
  if (!(window_length_days > 0.0)) throw Error("fixed_windows: window length must be > 0");
  check_split_fraction(split_fraction);

  const auto length = std::max<std::int64_t>(1, std::llround(window_length_days * kSecondsPerDay));
  const auto [lo, hi] = std::minmax_element(ds.timestamps().begin(), ds.timestamps().end());
  const std::int64_t min_ts = *lo;
  const std::int64_t span = *hi - min_ts;
  // last window closed on the right
  const std::int64_t count = std::max<std::int64_t>(1, (span + length - 1) / length);

  WindowSeries series;
  series.windows.resize(static_cast<std::size_t>(count));
  for (std::int64_t w = 0; w < count; ++w) {
    auto& win = series.windows[static_cast<std::size_t>(w)];
    win.index = static_cast<std::size_t>(w);
    win.start_ts = min_ts + w * length;
    win.end_ts = (w + 1 == count) ? min_ts + count * length : min_ts + (w + 1) * length - 1;
  }
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    const std::int64_t w = std::min(count - 1, (ds.timestamp(i) - min_ts) / length);
    series.windows[static_cast<std::size_t>(w)].members.push_back(i);
  }
  while (series.windows.size() > 1 && series.windows.back().empty()) series.windows.pop_back();
  assign_splits(ds, series, split_fraction, seed);
  return series;
}

std::vector<int> dbscan_1d(std::span<const std::int64_t> points, double eps, std::size_t min_samples) {
  const std::size_t n = points.size();
  std::vector<int> cluster(n, -1);
  if (n == 0) return cluster;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
  auto value = [&](std::size_t pos) { return static_cast<double>(points[order[pos]]); };

  // Neighbourhood sizes (self included) by two pointers over sorted values.
  std::vector<bool> core(n, false);
  std::size_t left = 0;
  std::size_t right = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (value(i) - value(left) > eps) ++left;
    if (right < i) right = i;
    while (right + 1 < n && value(right + 1) - value(i) <= eps) ++right;
    core[i] = (right - left + 1) >= min_samples;
  }

  // Consecutive cores within eps are density-connected.
  std::vector<int> sorted_cluster(n, -1);
  int next_id = -1;
  std::ptrdiff_t prev_core = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    if (prev_core < 0 || value(i) - value(static_cast<std::size_t>(prev_core)) > eps) ++next_id;
    sorted_cluster[i] = next_id;
    prev_core = static_cast<std::ptrdiff_t>(i);
  }
  if (next_id < 0) return cluster;

  // Border points join the nearest core within eps; ties go left.
  std::vector<std::ptrdiff_t> core_left(n, -1), core_right(n, -1);
  for (std::size_t i = 0, last = 0; i < n; ++i) {
    if (core[i]) last = i + 1;
    core_left[i] = static_cast<std::ptrdiff_t>(last) - 1;
  }
  for (std::size_t i = n, last = 0; i-- > 0;) {
    if (core[i]) last = i + 1;
    core_right[i] = static_cast<std::ptrdiff_t>(last) - 1;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    double best = eps;
    int chosen = -1;
    if (core_left[i] >= 0) {
      const double d = value(i) - value(static_cast<std::size_t>(core_left[i]));
      if (d <= best) {
        best = d;
        chosen = sorted_cluster[static_cast<std::size_t>(core_left[i])];
      }
    }
    if (core_right[i] >= 0) {
      const double d = value(static_cast<std::size_t>(core_right[i])) - value(i);
      if (d <= eps && (chosen < 0 || d < best)) chosen = sorted_cluster[static_cast<std::size_t>(core_right[i])];
    }
    sorted_cluster[i] = chosen;
  }
  for (std::size_t i = 0; i < n; ++i) cluster[order[i]] = sorted_cluster[i];
  return cluster;
}

std::vector<int> kmeans_1d(std::span<const std::int64_t> points, std::size_t k, std::size_t max_iter) {
  if (k < 1) throw Error("kmeans: k must be >= 1");
  std::vector<double> sorted(points.begin(), points.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < k) {
    throw Error("kmeans: " + std::to_string(distinct.size()) + " distinct timestamps, need at least k=" +
                std::to_string(k));
  }

  auto quantile_centers = [k](const std::vector<double>& v) {
    std::vector<double> c(k);
    for (std::size_t i = 0; i < k; ++i) {
      const auto pos = static_cast<std::size_t>(static_cast<double>(2 * i + 1) / static_cast<double>(2 * k) *
                                                static_cast<double>(v.size()));
      c[i] = v[std::min(pos, v.size() - 1)];
    }
    return c;
  };
  std::vector<double> centers = quantile_centers(sorted);
  if (std::adjacent_find(centers.begin(), centers.end()) != centers.end()) centers = quantile_centers(distinct);

  const std::size_t n = points.size();
  std::vector<int> assign(n, -1);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = static_cast<double>(points[i]);
      int best = 0;
      double best_d = std::abs(x - centers[0]);
      for (std::size_t c = 1; c < k; ++c) {
        const double d = std::abs(x - centers[c]);
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[static_cast<std::size_t>(assign[i])] += static_cast<double>(points[i]);
      ++count[static_cast<std::size_t>(assign[i])];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c] > 0) centers[c] = sum[c] / static_cast<double>(count[c]);
    }
  }

  // Renumber by center, dropping empty clusters.
  std::vector<std::size_t> count(k, 0);
  for (const auto a : assign) ++count[static_cast<std::size_t>(a)];
  std::vector<std::size_t> by_center(k);
  std::iota(by_center.begin(), by_center.end(), std::size_t{0});
  std::stable_sort(by_center.begin(), by_center.end(),
                   [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });
  std::vector<int> remap(k, -1);
  int next = 0;
  for (const auto c : by_center) {
    if (count[c] > 0) remap[c] = next++;
  }
  for (auto& a : assign) a = remap[static_cast<std::size_t>(a)];
  return assign;
}

WindowSeries windows_from_clusters(const LabeledDataset& ds, std::span<const int> cluster_of_row,
                                   double split_fraction, std::uint64_t seed) {
  check_split_fraction(split_fraction);
  std::map<int, std::vector<std::size_t>> groups;
  WindowSeries series;
  for (std::size_t i = 0; i < cluster_of_row.size(); ++i) {
    if (cluster_of_row[i] < 0) {
      series.noise.push_back(i);
    } else {
      groups[cluster_of_row[i]].push_back(i);
    }
  }
  struct Pending {
    std::int64_t median;
    std::int64_t lo;
    std::int64_t hi;
    std::vector<std::size_t> rows;
  };
  std::vector<Pending> pending;
  for (auto& [id, rows] : groups) {
    std::vector<std::int64_t> ts;
    ts.reserve(rows.size());
    for (const auto r : rows) ts.push_back(ds.timestamp(r));
    std::sort(ts.begin(), ts.end());
    pending.push_back({ts[(ts.size() - 1) / 2], ts.front(), ts.back(), std::move(rows)});
  }
  std::stable_sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    return a.median != b.median ? a.median < b.median : a.lo < b.lo;
  });
  for (std::size_t w = 0; w < pending.size(); ++w) {
    Window win;
    win.index = w;
    win.start_ts = pending[w].lo;
    win.end_ts = pending[w].hi;
    win.members = std::move(pending[w].rows);
    series.windows.push_back(std::move(win));
  }
  assign_splits(ds, series, split_fraction, seed);
  return series;
}

WindowSeries dbscan_windows(const LabeledDataset& ds, const ClusterParams& params, double split_fraction,
                            std::uint64_t seed) {
  if (ds.empty()) throw Error("dbscan_windows: empty dataset");
  params.validate();
  const auto labels = dbscan_1d(ds.timestamps(), params.eps_days * kSecondsPerDay, params.min_samples);
  if (std::none_of(labels.begin(), labels.end(), [](int c) { return c >= 0; })) {
    throw Error("dbscan_windows: no cluster found (" + std::to_string(ds.n_samples()) +
                " points, min_samples=" + std::to_string(params.min_samples) + ")");
  }
  return windows_from_clusters(ds, labels, split_fraction, seed);
}

WindowSeries kmeans_windows(const LabeledDataset& ds, const ClusterParams& params, double split_fraction,
                            std::uint64_t seed) {
  if (ds.empty()) throw Error("kmeans_windows: empty dataset");
  params.validate();
  const auto labels = kmeans_1d(ds.timestamps(), params.k);
  return windows_from_clusters(ds, labels, split_fraction, seed);
}

WindowSeries cluster_windows_on_subset(const LabeledDataset& ds, std::span<const std::size_t> cluster_rows,
                                       const ClusterParams& params, double split_fraction,
                                       std::uint64_t seed) {
  params.validate();
  std::vector<std::int64_t> ts;
  ts.reserve(cluster_rows.size());
  for (const auto r : cluster_rows) ts.push_back(ds.timestamp(r));
  if (ts.empty()) throw Error("cluster windows: no rows to cluster");

  const auto labels = params.algorithm == ClusterAlgorithm::dbscan
                          ? dbscan_1d(ts, params.eps_days * kSecondsPerDay, params.min_samples)
                          : kmeans_1d(ts, params.k);
  std::map<int, std::pair<std::int64_t, std::int64_t>> spans;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (labels[i] < 0) continue;
    auto [it, inserted] = spans.try_emplace(labels[i], ts[i], ts[i]);
    if (!inserted) {
      it->second.first = std::min(it->second.first, ts[i]);
      it->second.second = std::max(it->second.second, ts[i]);
    }
  }
  if (spans.empty()) throw Error("cluster windows: no cluster found");

  // 1-D clusters occupy disjoint intervals, so each row lands in at most one.
  std::vector<int> row_cluster(ds.n_samples(), -1);
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    for (const auto& [id, span] : spans) {
      if (ds.timestamp(i) >= span.first && ds.timestamp(i) <= span.second) {
        row_cluster[i] = id;
        break;
      }
    }
  }
  return windows_from_clusters(ds, row_cluster, split_fraction, seed);
}

void write_window_assignments(const WindowSeries& series, std::ostream& out) {
  struct Entry {
    std::size_t row;
    std::size_t window;
    const char* role;
  };
  std::vector<Entry> entries;
  for (const auto& w : series.windows) {
    for (const auto r : w.train) entries.push_back({r, w.index, "train"});
    for (const auto r : w.test) entries.push_back({r, w.index, "test"});
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
  out << "row_index,window_index,role\n";
  std::size_t next_noise = 0;
  std::vector<std::size_t> noise = series.noise;
  std::sort(noise.begin(), noise.end());
  for (const auto& e : entries) {
    while (next_noise < noise.size() && noise[next_noise] < e.row) out << noise[next_noise++] << ",,noise\n";
    out << e.row << ',' << e.window << ',' << e.role << '\n';
  }
  while (next_noise < noise.size()) out << noise[next_noise++] << ",,noise\n";
}

}  // namespace driftrules
