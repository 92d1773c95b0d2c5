#include "driftrules/synth.hpp"

#include <algorithm>
#include <cmath>

#include "driftrules/windowing.hpp"

namespace driftrules {

void FamilySpec::validate(std::size_t min_samples_leaf) const {
  if (name.empty()) throw Error("family spec: empty name");
  if (mean.size() != stddev.size()) throw Error("family spec " + name + ": mean/std length mismatch");
  for (const double s : stddev) {
    if (!(s > 0.0)) throw Error("family spec " + name + ": std must be > 0");
  }
  if (samples_per_window < 2 * min_samples_leaf) {
    throw Error("family spec " + name + ": samples_per_window below 2 * min_samples_leaf");
  }
}

std::string to_string(DriftKind kind) {
  switch (kind) {
    case DriftKind::none: return "none";
    case DriftKind::sudden: return "sudden";
    case DriftKind::gradual: return "gradual";
    case DriftKind::importance_swap: return "importance_swap";
  }
  return "none";
}

DriftKind parse_drift_kind(const std::string& s) {
  if (s == "none") return DriftKind::none;
  if (s == "sudden") return DriftKind::sudden;
  if (s == "gradual") return DriftKind::gradual;
  if (s == "importance_swap" || s == "swap") return DriftKind::importance_swap;
  throw Error("unknown drift kind '" + s + "' (none|sudden|gradual|importance_swap)");
}

DriftSchedule stationary_schedule(std::size_t n_windows, std::size_t n_features) {
  DriftSchedule s;
  s.offsets.assign(n_windows, std::vector<double>(n_features, 0.0));
  return s;
}

DriftSchedule sudden_schedule(std::string family, std::size_t n_windows, std::size_t n_features, double magnitude,
                              std::size_t change_window, std::vector<double> direction) {
  if (change_window == 0 || change_window >= n_windows) throw Error("sudden schedule: change window out of range");
  if (direction.empty()) direction.assign(n_features, 1.0);
  if (direction.size() != n_features) throw Error("sudden schedule: direction length mismatch");
  double norm = 0.0;
  for (const double v : direction) norm += v * v;
  norm = std::sqrt(norm);
  if (norm == 0.0) throw Error("sudden schedule: zero direction");

  DriftSchedule s = stationary_schedule(n_windows, n_features);
  s.kind = DriftKind::sudden;
  s.family = std::move(family);
  s.change_window = change_window;
  for (std::size_t w = change_window; w < n_windows; ++w) {
    for (std::size_t j = 0; j < n_features; ++j) s.offsets[w][j] = magnitude * direction[j] / norm;
  }
  return s;
}

DriftSchedule gradual_schedule(std::string family, std::size_t n_windows, std::vector<double> total,
                               std::size_t ramp_start, std::size_t ramp_end) {
  if (ramp_end == 0) ramp_end = n_windows;
  if (ramp_start >= ramp_end || ramp_end > n_windows) throw Error("gradual schedule: invalid ramp");
  DriftSchedule s = stationary_schedule(n_windows, total.size());
  s.kind = DriftKind::gradual;
  s.family = std::move(family);
  s.change_window = ramp_start;
  for (std::size_t w = 0; w < n_windows; ++w) {
    const double progress =
        std::clamp((static_cast<double>(w) - static_cast<double>(ramp_start)) /
                       static_cast<double>(ramp_end - ramp_start),
                   0.0, 1.0);
    for (std::size_t j = 0; j < total.size(); ++j) s.offsets[w][j] = progress * total[j];
  }
  return s;
}

DriftSchedule swap_schedule(std::string family, std::size_t n_windows, std::size_t n_features,
                            std::size_t swap_window, std::size_t a, std::size_t b) {
  if (a == b || a >= n_features || b >= n_features) throw Error("swap schedule: invalid feature pair");
  if (swap_window == 0 || swap_window >= n_windows) throw Error("swap schedule: swap window out of range");
  DriftSchedule s = stationary_schedule(n_windows, n_features);
  s.kind = DriftKind::importance_swap;
  s.family = std::move(family);
  s.change_window = swap_window;
  s.swap_a = a;
  s.swap_b = b;
  return s;
}

double true_shift(const DriftSchedule& schedule, std::size_t t) {
  if (t + 1 >= schedule.n_windows()) throw Error("true_shift: transition index out of range");
  if (schedule.kind == DriftKind::importance_swap) {
    return t + 1 == schedule.change_window ? kSwapTrueShift : 0.0;
  }
  const auto& a = schedule.offsets[t];
  const auto& b = schedule.offsets[t + 1];
  double sq = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sq += (b[j] - a[j]) * (b[j] - a[j]);
  return std::sqrt(sq);
}

std::vector<double> true_shift_series(const DriftSchedule& schedule) {
  std::vector<double> out;
  for (std::size_t t = 0; t + 1 < schedule.n_windows(); ++t) out.push_back(true_shift(schedule, t));
  return out;
}

LabeledDataset generate(const std::vector<FamilySpec>& specs, const DriftSchedule& schedule, std::size_t n_windows,
                        double window_length_days, std::uint64_t seed, std::int64_t epoch) {
  if (specs.size() < 2) throw Error("generate: need at least 2 family specs");
  if (n_windows < 4) throw Error("generate: need at least 4 windows");
  if (schedule.n_windows() != n_windows) throw Error("generate: schedule length differs from window count");
  const std::size_t d = specs.front().mean.size();
  for (const auto& s : specs) {
    s.validate();
    if (s.mean.size() != d) throw Error("generate: family " + s.name + " has a different feature count");
  }
  for (const auto& o : schedule.offsets) {
    if (o.size() != d) throw Error("generate: schedule offset length differs from feature count");
  }
  if (schedule.kind != DriftKind::none &&
      std::none_of(specs.begin(), specs.end(), [&](const FamilySpec& s) { return s.name == schedule.family; })) {
    throw Error("generate: drifting family '" + schedule.family + "' not among the specs");
  }

  const auto length = std::max<std::int64_t>(1, std::llround(window_length_days * kSecondsPerDay));

  struct Row {
    std::string id;
    std::int64_t ts;
    int label;
    const std::string* family;
    std::vector<double> x;
  };
  std::vector<std::vector<Row>> per_window(n_windows);
  const auto nw = static_cast<std::ptrdiff_t>(n_windows);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t wi = 0; wi < nw; ++wi) {
    const auto w = static_cast<std::size_t>(wi);
    auto& rows = per_window[w];
    for (std::size_t f = 0; f < specs.size(); ++f) {
      const auto& spec = specs[f];
      Rng rng(derive_seed(seed, w * 4096 + f));
      const bool drifting = schedule.kind != DriftKind::none && spec.name == schedule.family;
      const bool swapped = drifting && schedule.kind == DriftKind::importance_swap && w >= schedule.change_window;
      for (std::size_t s = 0; s < spec.samples_per_window; ++s) {
        Row r;
        r.id = spec.name + "-" + std::to_string(w) + "-" + std::to_string(s);
        r.ts = epoch + static_cast<std::int64_t>(w) * length +
               static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(length)));
        r.label = spec.benign ? 0 : 1;
        r.family = &spec.name;
        r.x.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
          const double offset = drifting ? schedule.offsets[w][j] : 0.0;
          r.x[j] = spec.mean[j] + offset + spec.stddev[j] * rng.normal();
        }
        if (swapped) std::swap(r.x[schedule.swap_a], r.x[schedule.swap_b]);
        rows.push_back(std::move(r));
      }
    }
  }

  LabeledDataset ds(d);
  ds.provenance().source = "synth(seed=" + std::to_string(seed) + ", kind=" + to_string(schedule.kind) + ")";
  for (auto& rows : per_window) {
    for (auto& r : rows) ds.add(std::move(r.id), r.ts, r.label, *r.family, r.x);
  }
  return ds;
}

std::vector<FamilySpec> default_families(std::size_t n_families, std::size_t n_features,
                                         std::size_t samples_per_window, std::uint64_t seed, double separation) {
  std::vector<FamilySpec> specs;
  specs.push_back({"benign", std::vector<double>(n_features, 0.0), std::vector<double>(n_features, 1.0),
                   samples_per_window, true});
  Rng rng(derive_seed(seed, 0xfa11));
  for (std::size_t f = 0; f < n_families; ++f) {
    FamilySpec s;
    s.name = "fam" + std::to_string(f);
    s.mean.resize(n_features);
    for (auto& m : s.mean) m = separation * rng.normal();
    s.stddev.assign(n_features, 1.0);
    s.samples_per_window = samples_per_window;
    specs.push_back(std::move(s));
  }
  return specs;
}

nlohmann::json truth_json(const std::vector<FamilySpec>& specs, const DriftSchedule& schedule,
                          double window_length_days, std::uint64_t seed) {
  nlohmann::json families = nlohmann::json::array();
  for (const auto& s : specs) {
    families.push_back({{"name", s.name},
                        {"benign", s.benign},
                        {"mean", s.mean},
                        {"std", s.stddev},
                        {"samples_per_window", s.samples_per_window}});
  }
  return {{"seed", seed},
          {"window_length_days", window_length_days},
          {"n_windows", schedule.n_windows()},
          {"families", std::move(families)},
          {"schedule",
           {{"kind", to_string(schedule.kind)},
            {"family", schedule.family},
            {"change_window", schedule.change_window},
            {"swap_features", {schedule.swap_a, schedule.swap_b}},
            {"offsets", schedule.offsets}}},
          {"true_shift", true_shift_series(schedule)}};
}

}  // namespace driftrules
