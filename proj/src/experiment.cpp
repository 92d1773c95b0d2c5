#include "driftrules/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

namespace driftrules {

namespace {

std::string opt_field(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

Matrix family_rows(const Matrix& all, const LabeledDataset& ds, std::span<const std::size_t> members) {
  std::vector<std::size_t> rows;
  for (const auto m : members) {
    if (ds.label(m) == 1) rows.push_back(m);
  }
  return all.select_rows(rows);
}

}  // namespace

std::string to_string(Scenario s) { return s == Scenario::fvb ? "fvb" : "fvf"; }

std::string to_string(WindowMode m) {
  switch (m) {
    case WindowMode::fixed: return "fixed";
    case WindowMode::dbscan: return "dbscan";
    case WindowMode::kmeans: return "kmeans";
  }
  return "fixed";
}

std::string to_string(PopulationMode m) {
  return m == PopulationMode::next_window_concat ? "next_window_concat" : "current_window_concat";
}

std::string to_string(ClusterScope s) { return s == ClusterScope::pair ? "pair" : "family"; }

std::vector<std::string> ExperimentConfig::validation_errors() const {
  std::vector<std::string> errors;
  if (windowing.mode == WindowMode::fixed && !(windowing.length_days > 0.0)) {
    errors.push_back("window.length_days must be > 0");
  }
  if (!(windowing.split_fraction > 0.0 && windowing.split_fraction < 1.0)) {
    errors.push_back("window.split_fraction must lie in (0, 1)");
  }
  if (!(windowing.cluster.eps_days > 0.0)) errors.push_back("window.eps_days must be > 0");
  if (windowing.cluster.min_samples < 1) errors.push_back("window.min_samples must be >= 1");
  if (windowing.cluster.k < 1) errors.push_back("window.k must be >= 1");
  if (tree.max_depth < 1) errors.push_back("tree.max_depth must be >= 1");
  if (tree.min_samples_leaf < 1) errors.push_back("tree.min_samples_leaf must be >= 1");
  if (domain.forest.n_trees < 1) errors.push_back("forest.n_trees must be >= 1");
  if (domain.forest.tree.max_depth < 1) errors.push_back("forest.max_depth must be >= 1");
  if (!(domain.holdout_fraction > 0.0 && domain.holdout_fraction < 1.0)) {
    errors.push_back("forest.holdout_fraction must lie in (0, 1)");
  }
  if (lags.empty()) errors.push_back("experiment.lags must not be empty");
  for (const int l : lags) {
    if (l != 0 && l != 1) errors.push_back("experiment.lags: lag " + std::to_string(l) + " not in {0, 1}");
  }
  for (const auto& p : pairs) {
    if (p.positive == p.negative) errors.push_back("experiment.pairs: pair " + p.id() + " repeats a family");
  }
  if (scenario == Scenario::fvb && !pairs.empty()) errors.push_back("experiment.pairs is only valid for fvf");
  if (medoid_sample_cap < 1) errors.push_back("experiment.medoid_sample_cap must be >= 1");
  return errors;
}

const std::vector<std::string>& drift_metric_names() {
  static const std::vector<std::string> names = {
      "feature_cosine_similarity", "feature_pearson_correlation", "feature_l1",   "feature_l2",
      "prediction_agreement",      "coverage_mean_diff",          "activation_stability", "jaccard_cover"};
  return names;
}

const std::vector<std::string>& target_names() {
  static const std::vector<std::string> names = {"accuracy_diff", "mean_l2", "domain_auc", "mean_wasserstein",
                                                 "ks_mean"};
  return names;
}

std::optional<double> drift_value(const TransitionRecord& r, const std::string& metric) {
  if (!r.drift) return std::nullopt;
  const auto& d = *r.drift;
  if (metric == "feature_cosine_similarity") return d.feature_cosine_similarity;
  if (metric == "feature_pearson_correlation") return d.feature_pearson_correlation;
  if (metric == "feature_l1") return d.feature_l1;
  if (metric == "feature_l2") return d.feature_l2;
  if (metric == "prediction_agreement") return d.prediction_agreement;
  if (metric == "coverage_mean_diff") return d.coverage_mean_diff;
  if (metric == "activation_stability") return d.activation_stability;
  if (metric == "jaccard_cover") return d.jaccard_cover;
  throw Error("unknown drift metric '" + metric + "'");
}

std::optional<double> target_value(const TransitionRecord& r, const std::string& target) {
  if (target == "accuracy_diff") return r.accuracy_diff;
  if (target == "accuracy") return r.accuracy;
  if (!r.shift) {
    if (target == "mean_l2" || target == "domain_auc" || target == "mean_wasserstein" || target == "ks_mean") {
      return std::nullopt;
    }
    throw Error("unknown target '" + target + "'");
  }
  if (target == "mean_l2") return r.shift->mean_l2;
  if (target == "domain_auc") return r.shift->domain_auc;
  if (target == "mean_wasserstein") return r.shift->mean_wasserstein;
  if (target == "ks_mean") return r.shift->ks_mean;
  throw Error("unknown target '" + target + "'");
}

LabeledDataset make_pair_dataset(const LabeledDataset& ds, Scenario scenario, const FamilyPair& pair) {
  if (pair.positive == pair.negative) throw Error("pair " + pair.id() + ": both sides are the same family");
  std::vector<std::size_t> rows;
  std::vector<int> labels;
  std::size_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    if (ds.family(i) == pair.positive) {
      rows.push_back(i);
      labels.push_back(1);
      ++pos;
    } else if (scenario == Scenario::fvb ? ds.label(i) == 0 : ds.family(i) == pair.negative) {
      rows.push_back(i);
      labels.push_back(0);
      ++neg;
    }
  }
  if (pos == 0) throw Error("pair " + pair.id() + ": no samples of family '" + pair.positive + "'");
  if (neg == 0) throw Error("pair " + pair.id() + ": negative side '" + pair.negative + "' is empty");
  return ds.subset(rows).relabeled(std::move(labels));
}

std::size_t family_medoid(const Matrix& x, std::span<const std::size_t> members, std::size_t cap,
                          std::uint64_t seed) {
  if (members.empty()) throw Error("family_medoid: no members");
  std::vector<std::size_t> reference(members.begin(), members.end());
  if (reference.size() > cap) {
    Rng rng(seed);
    rng.shuffle(reference);
    reference.resize(cap);
  }
  const auto n = static_cast<std::ptrdiff_t>(members.size());
  std::vector<double> cost(members.size(), 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto a = x.row(members[static_cast<std::size_t>(i)]);
    double sum = 0.0;
    for (const auto r : reference) {
      const auto b = x.row(r);
      double sq = 0.0;
      for (std::size_t j = 0; j < a.size(); ++j) sq += (a[j] - b[j]) * (a[j] - b[j]);
      sum += std::sqrt(sq);
    }
    cost[static_cast<std::size_t>(i)] = sum;
  }
  const auto best = std::min_element(cost.begin(), cost.end()) - cost.begin();
  return members[static_cast<std::size_t>(best)];
}

std::vector<FamilyPair> select_fvf_pairs(const LabeledDataset& ds, const std::vector<std::string>& families,
                                         std::size_t cap, std::uint64_t seed) {
  if (families.size() < 2) throw Error("select_fvf_pairs: need at least 2 families");
  const Matrix x = ds.all_rows();
  std::vector<std::vector<double>> medoids;
  for (std::size_t f = 0; f < families.size(); ++f) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
      if (ds.family(i) == families[f]) members.push_back(i);
    }
    if (members.empty()) throw Error("select_fvf_pairs: family '" + families[f] + "' has no samples");
    const auto m = family_medoid(x, members, cap, derive_seed(seed, f));
    const auto row = x.row(m);
    medoids.emplace_back(row.begin(), row.end());
  }
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  for (std::size_t f = 0; f < families.size(); ++f) {
    std::size_t best = f;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < families.size(); ++g) {
      if (g == f) continue;
      double sq = 0.0;
      for (std::size_t j = 0; j < medoids[f].size(); ++j) sq += (medoids[f][j] - medoids[g][j]) * (medoids[f][j] - medoids[g][j]);
      if (sq < best_d) {
        best_d = sq;
        best = g;
      }
    }
    chosen.insert({std::min(f, best), std::max(f, best)});
  }
  std::vector<FamilyPair> pairs;
  for (const auto& [a, b] : chosen) pairs.push_back({families[a], families[b]});
  return pairs;
}

std::vector<std::string> malicious_families(const LabeledDataset& ds) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    if (ds.label(i) == 1 && !ds.family(i).empty()) names.insert(ds.family(i));
  }
  return {names.begin(), names.end()};
}

WindowSeries build_windows(const LabeledDataset& ds_pair, const ExperimentConfig& config) {
  const auto& w = config.windowing;
  if (w.mode == WindowMode::fixed) return fixed_windows(ds_pair, w.length_days, w.split_fraction, config.seed);

  ClusterParams params = w.cluster;
  params.algorithm = w.mode == WindowMode::dbscan ? ClusterAlgorithm::dbscan : ClusterAlgorithm::kmeans;
  if (w.scope == ClusterScope::family) {
    std::vector<std::size_t> positives;
    for (std::size_t i = 0; i < ds_pair.n_samples(); ++i) {
      if (ds_pair.label(i) == 1) positives.push_back(i);
    }
    return cluster_windows_on_subset(ds_pair, positives, params, w.split_fraction, config.seed);
  }
  return params.algorithm == ClusterAlgorithm::dbscan
             ? dbscan_windows(ds_pair, params, w.split_fraction, config.seed)
             : kmeans_windows(ds_pair, params, w.split_fraction, config.seed);
}

PairResult run_pair(const LabeledDataset& ds_pair, const ExperimentConfig& config, const FamilyPair& pair) {
  PairResult res;
  res.pair = pair;
  res.windows = build_windows(ds_pair, config);
  const auto& windows = res.windows.windows;
  const std::size_t n_windows = windows.size();
  const auto usable = static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const Window& w) { return !w.train.empty(); }));
  if (usable < 3) {
    throw Error("pair " + pair.id() + ": " + std::to_string(usable) + " usable windows, need at least 3");
  }
  if (!res.windows.noise.empty()) {
    res.log.push_back(std::to_string(res.windows.noise.size()) + " rows fell outside every window (noise)");
  }

  const Matrix all = ds_pair.all_rows();
  const auto& labels = ds_pair.labels();

  std::vector<std::optional<DecisionTree>> models(n_windows);
  std::vector<std::string> train_errors(n_windows);
  const auto nw = static_cast<std::ptrdiff_t>(n_windows);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t wi = 0; wi < nw; ++wi) {
    const auto& w = windows[static_cast<std::size_t>(wi)];
    if (w.train.empty()) continue;
    try {
      const Matrix x = all.select_rows(w.train);
      std::vector<int> y(w.train.size());
      for (std::size_t i = 0; i < w.train.size(); ++i) y[i] = labels[w.train[i]];
      models[static_cast<std::size_t>(wi)] = train_tree(x, y, config.tree);
    } catch (const std::exception& e) {
      train_errors[static_cast<std::size_t>(wi)] = e.what();
    }
  }

  res.rulesets.resize(n_windows);
  std::vector<ImportanceVector> importance(n_windows);
  for (std::size_t t = 0; t < n_windows; ++t) {
    if (!train_errors[t].empty()) res.log.push_back("window " + std::to_string(t) + ": " + train_errors[t]);
    if (!models[t]) continue;
    res.rulesets[t] = extract_ruleset(*models[t], t);
    importance[t] = feature_importance(*res.rulesets[t]);
    if (importance[t].degenerate) res.log.push_back("window " + std::to_string(t) + ": single-leaf tree");
  }

  res.accuracies.assign(n_windows, std::nullopt);
  for (std::size_t t = 0; t + 1 < n_windows; ++t) {
    const auto& test = windows[t + 1].test;
    if (!models[t] || test.empty()) continue;
    std::size_t correct = 0;
    for (const auto r : test) correct += models[t]->predict(all.row(r)) == labels[r] ? 1 : 0;
    res.accuracies[t] = static_cast<double>(correct) / static_cast<double>(test.size());
  }

  for (std::size_t t = 0; t + 1 < n_windows; ++t) {
    const auto& wp = windows[t];
    const auto& wc = windows[t + 1];
    TransitionRecord rec;
    rec.pair = pair.id();
    rec.t = t;
    rec.prev_start = wp.start_ts;
    rec.prev_end = wp.end_ts;
    rec.curr_start = wc.start_ts;
    rec.curr_end = wc.end_ts;
    rec.n_prev = wp.members.size();
    rec.n_curr = wc.members.size();
    for (const auto m : wp.members) rec.n_family_prev += labels[m] == 1 ? 1 : 0;
    for (const auto m : wc.members) rec.n_family_curr += labels[m] == 1 ? 1 : 0;
    rec.accuracy = res.accuracies[t];
    if (t >= 1 && res.accuracies[t] && res.accuracies[t - 1]) {
      rec.accuracy_diff = *res.accuracies[t] - *res.accuracies[t - 1];
    }

    if (wp.empty() || wc.empty()) {
      rec.skipped = true;
      rec.skip_reason = "empty_window";
    } else if (!models[t] || !models[t + 1]) {
      rec.skipped = true;
      rec.skip_reason = "missing_model";
    }
    if (rec.skipped) {
      res.log.push_back("transition " + std::to_string(t) + " skipped: " + rec.skip_reason);
      res.transitions.push_back(std::move(rec));
      continue;
    }

    // No leakage from training rows of t into the evaluation window.
    std::vector<std::size_t> overlap;
    std::set_intersection(wp.train.begin(), wp.train.end(), wc.members.begin(), wc.members.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) throw Error("pair " + pair.id() + ": training rows of window t leak into window t+1");

    const Matrix x_prev = all.select_rows(wp.members);
    const Matrix x_curr = all.select_rows(wc.members);
    const Matrix& x_eval = config.population == PopulationMode::next_window_concat ? x_curr : x_prev;
    rec.drift = compute_drift(*res.rulesets[t], importance[t], *res.rulesets[t + 1], importance[t + 1], x_prev,
                              x_curr, x_eval);

    const Matrix f_prev = family_rows(all, ds_pair, wp.members);
    const Matrix f_curr = family_rows(all, ds_pair, wc.members);
    if (f_prev.rows() > 0 && f_curr.rows() > 0) {
      rec.shift = compute_shift(f_prev, f_curr, config.domain, derive_seed(config.seed, t));
      if (!rec.shift->domain_auc) {
        res.log.push_back("transition " + std::to_string(t) + ": population below " +
                          std::to_string(config.domain.min_population) + ", domain_auc absent");
      }
    } else {
      res.log.push_back("transition " + std::to_string(t) + ": no positive-class rows, shift metrics absent");
    }
    res.transitions.push_back(std::move(rec));
  }

  res.correlations = correlate_pair(pair.id(), res.transitions, config.lags);
  return res;
}

std::vector<PairCorrelation> correlate_pair(const std::string& pair_id, const std::vector<TransitionRecord>& records,
                                            const std::vector<int>& lags) {
  std::vector<PairCorrelation> out;
  for (const auto& metric : drift_metric_names()) {
    std::vector<std::optional<double>> drift;
    for (const auto& r : records) drift.push_back(drift_value(r, metric));
    for (const auto& target : target_names()) {
      std::vector<std::optional<double>> series;
      for (const auto& r : records) series.push_back(target_value(r, target));
      for (const int lag : lags) {
        PairCorrelation pc;
        pc.pair = pair_id;
        pc.key = {metric, target, lag};
        try {
          auto c = lagged_correlation(drift, series, lag);
          c.metric = metric;
          c.target = target;
          pc.result = c;
        } catch (const Error&) {
          // absent cell
        }
        out.push_back(std::move(pc));
      }
    }
  }
  return out;
}

std::vector<FamilyPair> resolve_pairs(const LabeledDataset& ds, const ExperimentConfig& config) {
  std::vector<std::string> families = config.families;
  if (families.empty()) families = malicious_families(ds);
  if (config.scenario == Scenario::fvb) {
    std::vector<FamilyPair> pairs;
    for (const auto& f : families) pairs.push_back({f, kBenign});
    return pairs;
  }
  if (!config.pairs.empty()) return config.pairs;
  return select_fvf_pairs(ds, families, config.medoid_sample_cap, config.seed);
}

ExperimentResult run_experiment(const LabeledDataset& ds, const ExperimentConfig& config) {
  const auto errors = config.validation_errors();
  if (!errors.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw Error(msg);
  }
  const auto pairs = resolve_pairs(ds, config);
  if (pairs.empty()) throw Error("no family pairs to evaluate");

  std::vector<std::optional<PairResult>> results(pairs.size());
  std::vector<std::string> failures(pairs.size());
  const auto np = static_cast<std::ptrdiff_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    const auto& pair = pairs[static_cast<std::size_t>(i)];
    try {
      const auto ds_pair = make_pair_dataset(ds, config.scenario, pair);
      results[static_cast<std::size_t>(i)] = run_pair(ds_pair, config, pair);
    } catch (const std::exception& e) {
      failures[static_cast<std::size_t>(i)] = e.what();
    }
  }

  ExperimentResult out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (results[i]) {
      out.pairs.push_back(std::move(*results[i]));
    } else {
      out.failures.emplace_back(pairs[i].id(), failures[i]);
    }
  }
  if (out.pairs.empty()) {
    std::string msg = "every pair failed:";
    for (const auto& [id, why] : out.failures) msg += "\n  " + id + ": " + why;
    throw Error(msg);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const PairResult& a, const PairResult& b) { return a.pair.id() < b.pair.id(); });
  std::sort(out.failures.begin(), out.failures.end());

  std::vector<PairCorrelation> all;
  for (const auto& p : out.pairs) all.insert(all.end(), p.correlations.begin(), p.correlations.end());
  out.summary = aggregate(all);
  return out;
}

LabeledDataset prepare_dataset(const LabeledDataset& ds, const ExperimentConfig& config) {
  if (config.select_k == 0 || ds.empty()) return ds;
  std::vector<std::size_t> fit_rows;
  try {
    const auto windows = build_windows(ds, config);
    for (const auto& w : windows.windows) fit_rows.insert(fit_rows.end(), w.train.begin(), w.train.end());
  } catch (const Error&) {
    std::vector<std::size_t> all(ds.n_samples());
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> test;
    stratified_split(all, ds.labels(), config.windowing.split_fraction, config.seed, fit_rows, test);
  }
  std::sort(fit_rows.begin(), fit_rows.end());
  const auto sel = fit_select_k_best(ds, config.select_k, fit_rows);
  return apply_selector(ds, sel);
}

void write_transitions_csv(const ExperimentResult& result, std::ostream& out) {
  std::vector<std::string> columns = {"pair",         "t",           "prev_start",    "prev_end",
                                      "curr_start",   "curr_end",    "n_prev",        "n_curr",
                                      "n_family_prev", "n_family_curr", "accuracy",   "accuracy_diff"};
  for (const auto& m : drift_metric_names()) columns.push_back(m);
  columns.push_back("drift_degenerate");
  for (std::size_t i = 1; i < target_names().size(); ++i) columns.push_back(target_names()[i]);
  columns.push_back("skipped");
  columns.push_back("skip_reason");

  out << "# one row per window transition (t, t+1); rulesets R_t vs R_t+1; accuracy = model of window t on the "
         "test split of window t+1; accuracy_diff = accuracy_t - accuracy_t-1; shift metrics compare the "
         "positive-class populations of windows t and t+1; NA = absent\n";
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
  for (const auto& p : result.pairs) {
    for (const auto& r : p.transitions) {
      out << r.pair << ',' << r.t << ',' << r.prev_start << ',' << r.prev_end << ',' << r.curr_start << ','
          << r.curr_end << ',' << r.n_prev << ',' << r.n_curr << ',' << r.n_family_prev << ',' << r.n_family_curr
          << ',' << opt_field(r.accuracy) << ',' << opt_field(r.accuracy_diff);
      for (const auto& m : drift_metric_names()) out << ',' << opt_field(drift_value(r, m));
      out << ',' << (r.drift && r.drift->degenerate ? 1 : 0);
      for (std::size_t i = 1; i < target_names().size(); ++i) out << ',' << opt_field(target_value(r, target_names()[i]));
      out << ',' << (r.skipped ? 1 : 0) << ',' << r.skip_reason << '\n';
    }
  }
}

void write_correlations_csv(const ExperimentResult& result, std::ostream& out) {
  out << "pair,metric,target,lag,rho,n,degenerate\n";
  for (const auto& p : result.pairs) {
    for (const auto& c : p.correlations) {
      out << c.pair << ',' << c.key.metric << ',' << c.key.target << ',' << c.key.lag << ',';
      if (c.result) {
        out << format_double(c.result->rho) << ',' << c.result->n_pairs << ',' << (c.result->degenerate ? 1 : 0);
      } else {
        out << "NA,0,0";
      }
      out << '\n';
    }
  }
}

nlohmann::json summary_to_json(const AggregateSummary& summary) {
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [key, cell] : summary.cells) {
    nlohmann::json j{{"metric", key.metric}, {"target", key.target}, {"lag", key.lag}, {"present", cell.has_value()}};
    if (cell) {
      j["mean"] = cell->mean;
      j["median"] = cell->median;
      j["std"] = cell->std;
      j["n"] = cell->rhos.size();
      j["rhos"] = cell->rhos;
    }
    cells.push_back(std::move(j));
  }
  return cells;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "rulesets");
  auto open = [](const std::filesystem::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "transitions.csv");
    write_transitions_csv(result, f);
  }
  {
    auto f = open(dir / "correlations.csv");
    write_correlations_csv(result, f);
  }
  for (const auto& p : result.pairs) {
    const auto pdir = dir / "rulesets" / p.pair.id();
    std::filesystem::create_directories(pdir);
    for (std::size_t t = 0; t < p.rulesets.size(); ++t) {
      if (!p.rulesets[t]) continue;
      auto js = open(pdir / ("window_" + std::to_string(t) + ".json"));
      js << ruleset_to_json(*p.rulesets[t]).dump(2) << '\n';
      auto txt = open(pdir / ("window_" + std::to_string(t) + ".txt"));
      txt << render_ruleset(*p.rulesets[t], p.pair.positive, p.pair.negative);
    }
    auto wf = open(pdir / "windows.csv");
    write_window_assignments(p.windows, wf);
  }
}

}  // namespace driftrules
