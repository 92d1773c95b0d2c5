#include "driftrules/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "driftrules/config.hpp"
#include "driftrules/experiment.hpp"
#include "driftrules/synth.hpp"

namespace driftrules {

namespace {

constexpr const char* kVersion = "0.1.0";

struct SynthOptions {
  std::string out;
  std::size_t windows = 12;
  std::string kind = "none";
  std::uint64_t seed = 52;
  std::size_t families = 3;
  std::size_t features = 10;
  std::size_t samples = 200;
  double window_days = 30.0;
  double magnitude = 2.0;
  std::size_t change_window = 0;
  std::string drift_family = "fam0";
  std::size_t ramp_start = 0;
  std::size_t ramp_end = 0;
  double separation = 1.5;
  std::size_t swap_a = 0;
  std::size_t swap_b = 1;
};

struct RunOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

struct ReportOptions {
  std::string in;
  std::string out;
  std::size_t top = 0;
};

DriftSchedule make_schedule(const SynthOptions& o) {
  const auto kind = parse_drift_kind(o.kind);
  const std::size_t change = o.change_window == 0 ? o.windows / 2 : o.change_window;
  switch (kind) {
    case DriftKind::none: return stationary_schedule(o.windows, o.features);
    case DriftKind::sudden: return sudden_schedule(o.drift_family, o.windows, o.features, o.magnitude, change);
    case DriftKind::gradual: {
      const double per_feature = o.magnitude / std::sqrt(static_cast<double>(o.features));
      return gradual_schedule(o.drift_family, o.windows, std::vector<double>(o.features, per_feature), o.ramp_start,
                              o.ramp_end);
    }
    case DriftKind::importance_swap:
      return swap_schedule(o.drift_family, o.windows, o.features, change, o.swap_a, o.swap_b);
  }
  return stationary_schedule(o.windows, o.features);
}

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
  try {
    const auto specs = default_families(o.families, o.features, o.samples, o.seed, o.separation);
    const auto schedule = make_schedule(o);
    const auto ds = generate(specs, schedule, o.windows, o.window_days, o.seed);
    const std::filesystem::path dir(o.out);
    std::filesystem::create_directories(dir);
    write_csv(ds, dir / "dataset.csv");
    std::ofstream truth(dir / "truth.json", std::ios::binary);
    if (!truth) throw Error("cannot write " + (dir / "truth.json").string());
    truth << truth_json(specs, schedule, o.window_days, o.seed).dump(2) << '\n';
    if (!truth) throw Error("write failed: " + (dir / "truth.json").string());
    out << "wrote " << ds.n_samples() << " rows x " << ds.n_features() << " features ("
        << specs.size() << " populations, " << o.windows << " windows) to " << (dir / "dataset.csv").string()
        << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "synth: " << e.what() << '\n';
    return 1;
  }
}

nlohmann::json pairs_json(const ExperimentResult& result) {
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : result.pairs) {
    std::size_t usable = 0;
    for (const auto& t : p.transitions) usable += t.skipped ? 0 : 1;
    pairs.push_back({{"pair", p.pair.id()},
                     {"positive", p.pair.positive},
                     {"negative", p.pair.negative},
                     {"windows", p.windows.size()},
                     {"noise", p.windows.noise.size()},
                     {"transitions", p.transitions.size()},
                     {"usable_transitions", usable},
                     {"log", p.log}});
  }
  return pairs;
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<std::string> errors;
  ConfigMap overrides;
  if (!o.config.empty()) overrides = ConfigMap::load(o.config, errors);
  for (const auto& s : o.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      errors.push_back("--set expects key=value, found '" + s + "'");
      continue;
    }
    overrides.set(s.substr(0, eq), s.substr(eq + 1), errors);
  }
  if (o.seed) overrides.set("experiment.seed", std::to_string(*o.seed), errors);
  if (!o.out.empty()) overrides.set("output.dir", o.out, errors);

  const ConfigMap resolved = ConfigMap::defaults().resolved_with(overrides);
  const auto data = to_data_config(resolved, errors);
  const auto config = to_experiment_config(resolved, errors);
  if (!errors.empty()) {
    err << "run: invalid configuration (" << errors.size() << " problem" << (errors.size() == 1 ? "" : "s")
        << "):\n";
    for (const auto& e : errors) err << "  " << e << '\n';
    return 2;
  }

  try {
    const auto started = std::chrono::steady_clock::now();
    LabeledDataset ds = load_csv(data.path);
    if (data.dedup) ds = deduplicate(ds);
    if (data.min_ts || data.max_ts) {
      ds = filter_timestamps(ds, data.min_ts.value_or(std::numeric_limits<std::int64_t>::min()),
                             data.max_ts.value_or(std::numeric_limits<std::int64_t>::max()));
    }
    if (ds.empty()) throw Error("no rows left after filtering");
    const auto known = malicious_families(ds);
    std::vector<std::string> missing;
    auto check_family = [&](const std::string& f) {
      if (std::find(known.begin(), known.end(), f) == known.end()) missing.push_back(f);
    };
    for (const auto& f : config.families) check_family(f);
    for (const auto& p : config.pairs) {
      check_family(p.positive);
      check_family(p.negative);
    }
    if (!missing.empty()) {
      std::string msg = "families not present in the dataset:";
      for (const auto& m : missing) msg += " " + m;
      throw Error(msg);
    }
    ds = prepare_dataset(ds, config);

    const auto result = run_experiment(ds, config);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    write_outputs(result, data.output_dir);
    nlohmann::json failures = nlohmann::json::array();
    for (const auto& [id, why] : result.failures) {
      failures.push_back({{"pair", id}, {"reason", why}});
      err << "run: pair " << id << " failed: " << why << '\n';
    }
    nlohmann::json summary{
        {"config", resolved.to_json()},
        {"dataset",
         {{"source", ds.provenance().source},
          {"n_samples", ds.n_samples()},
          {"n_features", ds.n_features()},
          {"duplicates_dropped", ds.provenance().duplicates_dropped},
          {"out_of_range_dropped", ds.provenance().out_of_range_dropped},
          {"selected_columns", ds.provenance().selected_columns},
          {"filters", ds.provenance().filters}}},
        {"aggregate", summary_to_json(result.summary)},
        {"pairs", pairs_json(result)},
        {"failures", failures},
        {"metadata",
         {{"tool", "driftrules"},
          {"version", kVersion},
          {"std_definition", "population (divisor n)"},
          {"correlation", "Spearman, average ranks for ties"},
          {"elapsed_seconds", elapsed}}}};
    std::ofstream f(data.output_dir / "summary.json", std::ios::binary);
    if (!f) throw Error("cannot write " + (data.output_dir / "summary.json").string());
    f << summary.dump(2) << '\n';
    out << "evaluated " << result.pairs.size() << " pair(s), " << result.failures.size() << " failed; outputs in "
        << data.output_dir.string() << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "run: " << e.what() << '\n';
    return 1;
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

/// Copies the usable rows of transitions.csv, keeping the plotted columns.
std::size_t write_plot_csv(const std::filesystem::path& transitions, const std::filesystem::path& plot) {
  std::ifstream in(transitions);
  if (!in) throw Error("cannot read " + transitions.string());
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw Error(transitions.string() + ": missing header");
  std::vector<std::string> wanted = {"pair", "t", "accuracy", "accuracy_diff"};
  for (const auto& m : drift_metric_names()) wanted.push_back(m);
  for (std::size_t i = 1; i < target_names().size(); ++i) wanted.push_back(target_names()[i]);
  std::vector<std::size_t> idx;
  for (const auto& w : wanted) {
    const auto it = std::find(header.begin(), header.end(), w);
    if (it == header.end()) throw Error(transitions.string() + ": missing column " + w);
    idx.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  const auto skipped_it = std::find(header.begin(), header.end(), "skipped");
  if (skipped_it == header.end()) throw Error(transitions.string() + ": missing column skipped");
  const auto skipped_col = static_cast<std::size_t>(skipped_it - header.begin());

  std::ofstream out(plot, std::ios::binary);
  if (!out) throw Error("cannot write " + plot.string());
  for (std::size_t i = 0; i < wanted.size(); ++i) out << (i ? "," : "") << wanted[i];
  out << '\n';
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) throw Error(transitions.string() + ": ragged row");
    if (cells[skipped_col] == "1") continue;
    for (std::size_t i = 0; i < idx.size(); ++i) out << (i ? "," : "") << cells[idx[i]];
    out << '\n';
    ++rows;
  }
  return rows;
}

int cmd_report(const ReportOptions& o, std::ostream& out, std::ostream& err) {
  const std::filesystem::path dir(o.in);
  nlohmann::json summary;
  try {
    std::ifstream f(dir / "summary.json");
    if (!f) throw Error("cannot read " + (dir / "summary.json").string());
    summary = nlohmann::json::parse(f);
    if (!summary.contains("aggregate") || !summary["aggregate"].is_array()) {
      throw Error("summary.json has no 'aggregate' array");
    }
  } catch (const std::exception& e) {
    err << "report: malformed summary: " << e.what() << '\n';
    return 1;
  }

  struct Row {
    std::string metric, target;
    int lag;
    bool present;
    double mean, median, std;
    std::size_t n;
  };
  std::vector<Row> rows;
  try {
    for (const auto& c : summary["aggregate"]) {
      Row r{c.at("metric").get<std::string>(), c.at("target").get<std::string>(), c.at("lag").get<int>(),
            c.at("present").get<bool>(), 0.0, 0.0, 0.0, 0};
      if (r.present) {
        r.mean = c.at("mean").get<double>();
        r.median = c.at("median").get<double>();
        r.std = c.at("std").get<double>();
        r.n = c.at("n").get<std::size_t>();
      }
      rows.push_back(std::move(r));
    }
  } catch (const std::exception& e) {
    err << "report: malformed summary: " << e.what() << '\n';
    return 1;
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.present != b.present) return a.present;
    return std::abs(a.mean) > std::abs(b.mean);
  });
  if (o.top > 0 && rows.size() > o.top) rows.resize(o.top);

  std::ostringstream table;
  table << std::left << std::setw(5) << "rank" << std::setw(30) << "metric" << std::setw(18) << "target"
        << std::setw(5) << "lag" << std::right << std::setw(10) << "mean_rho" << std::setw(12) << "median_rho"
        << std::setw(10) << "std_rho" << std::setw(5) << "n" << '\n';
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    table << std::left << std::setw(5) << i + 1 << std::setw(30) << r.metric << std::setw(18) << r.target
          << std::setw(5) << r.lag << std::right << std::fixed << std::setprecision(3);
    if (r.present) {
      table << std::setw(10) << r.mean << std::setw(12) << r.median << std::setw(10) << r.std << std::setw(5) << r.n;
    } else {
      table << std::setw(10) << "NA" << std::setw(12) << "NA" << std::setw(10) << "NA" << std::setw(5) << 0;
    }
    table << '\n';
  }
  out << table.str();

  try {
    const auto plot = o.out.empty() ? dir / "plot.csv" : std::filesystem::path(o.out);
    {
      std::ofstream tf(dir / "table.txt", std::ios::binary);
      if (tf) tf << table.str();
    }
    if (std::filesystem::exists(dir / "transitions.csv")) {
      const auto n = write_plot_csv(dir / "transitions.csv", plot);
      err << "report: wrote " << n << " plot rows to " << plot.string() << '\n';
    } else {
      err << "report: no transitions.csv next to summary.json; plot CSV not written\n";
    }
  } catch (const std::exception& e) {
    err << "report: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Rule-based concept drift analysis for temporally ordered binary classification data", "driftrules"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  SynthOptions so;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset with a known drift schedule");
  synth->add_option("--out", so.out, "Output directory (dataset.csv, truth.json)")->required();
  synth->add_option("--windows", so.windows, "Number of windows")->capture_default_str();
  synth->add_option("--kind", so.kind, "none | sudden | gradual | importance_swap")->capture_default_str();
  synth->add_option("--seed", so.seed, "Random seed")->capture_default_str();
  synth->add_option("--families", so.families, "Number of malicious families")->capture_default_str();
  synth->add_option("--features", so.features, "Feature count")->capture_default_str();
  synth->add_option("--samples", so.samples, "Samples per family per window")->capture_default_str();
  synth->add_option("--window-days", so.window_days, "Window length in days")->capture_default_str();
  synth->add_option("--magnitude", so.magnitude, "Total drift offset norm")->capture_default_str();
  synth->add_option("--change-window", so.change_window, "First drifted window (default: windows/2)");
  synth->add_option("--drift-family", so.drift_family, "Family that drifts")->capture_default_str();
  synth->add_option("--ramp-start", so.ramp_start, "Gradual: first ramp window")->capture_default_str();
  synth->add_option("--ramp-end", so.ramp_end, "Gradual: window where the ramp completes (0 = last)");
  synth->add_option("--separation", so.separation, "Scale of family mean offsets")->capture_default_str();
  synth->add_option("--swap-a", so.swap_a, "importance_swap: first feature")->capture_default_str();
  synth->add_option("--swap-b", so.swap_b, "importance_swap: second feature")->capture_default_str();

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Run a drift experiment");
  run->add_option("--config", ro.config, "Config file (section.key = value) or a previous summary.json");
  run->add_option("--set", ro.sets, "Override one key: --set window.length_days=30");
  run->add_option("--out", ro.out, "Output directory (overrides output.dir)");
  run->add_option("--seed", ro.seed, "Seed (overrides experiment.seed)");

  ReportOptions po;
  auto* report = app.add_subcommand("report", "Summarize a finished run");
  report->add_option("--in", po.in, "Run output directory holding summary.json")->required();
  report->add_option("--top", po.top, "Show only the N strongest cells");
  report->add_option("--out", po.out, "Plot CSV path (default: <in>/plot.csv)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (synth->parsed()) return cmd_synth(so, out, err);
  if (run->parsed()) return cmd_run(ro, out, err);
  if (report->parsed()) return cmd_report(po, out, err);
  return 2;
}

}  // namespace driftrules
