#include <doctest.h>

#include <cmath>
#include <sstream>

#include "driftrules/ingest.hpp"

using namespace driftrules;

namespace {

LabeledDataset parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "test.csv");
}

LabeledDataset tiny(std::vector<std::string> ids, std::vector<std::int64_t> ts) {
  LabeledDataset ds(1);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const double v = static_cast<double>(i);
    ds.add(ids[i], ts[i], static_cast<int>(i % 2), "fam", std::span<const double>(&v, 1));
  }
  return ds;
}

}  // namespace

TEST_CASE("parse well-formed file") {
  const auto ds = parse(
      "sample_id,timestamp,label,family,f0,f1,f2\n"
      "a,10,0,benign,1.5,2,3\n"
      "b,20,1,x,4,5,6\r\n"
      "\n"
      "c,30,1,x,7,8,9\n"
      "d,40,0,benign,-1,0,1e-3\n");
  CHECK(ds.n_samples() == 4);
  CHECK(ds.n_features() == 3);
  CHECK(ds.column(0) == std::vector<double>{1.5, 4, 7, -1});
  CHECK(ds.value(3, 2) == doctest::Approx(1e-3));
  CHECK(ds.label(1) == 1);
  CHECK(ds.family(2) == "x");
  CHECK(ds.timestamp(3) == 40);
  CHECK(ds.provenance().source == "test.csv");
}

TEST_CASE("parse errors name the row") {
  const std::string header = "sample_id,timestamp,label,family,f0\n";
  try {
    parse(header + "a,1,0,b,1\nb,2,1,b,1\nc,3,2,b,1\n");
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse(header + "a,1,0,b\n"), Error);
  CHECK_THROWS_AS(parse(header + "a,x,0,b,1\n"), Error);
  CHECK_THROWS_AS(parse(header + "a,1,0,b,nan\n"), Error);
  CHECK_THROWS_AS(parse(header + "a,1,0,b,1z\n"), Error);
  CHECK_THROWS_AS(parse("id,timestamp,label,family,f0\n"), Error);
  CHECK_THROWS_AS(parse("sample_id,timestamp,label,family,f1\n"), Error);
  CHECK_THROWS_AS(parse(""), Error);
}

TEST_CASE("csv round trip is exact") {
  LabeledDataset ds(2);
  const double a[2] = {0.1, 1.0 / 3.0};
  const double b[2] = {-1e-300, 123456789.125};
  ds.add("x", 5, 1, "f", a);
  ds.add("y", 6, 0, "benign", b);
  std::stringstream buf;
  write_csv(ds, buf);
  const auto back = parse_csv(buf);
  CHECK(back.same_data(ds));
}

TEST_CASE("deduplicate keeps first occurrence") {
  auto d = deduplicate(tiny({"a", "b", "a", "c"}, {1, 2, 3, 4}));
  CHECK(d.n_samples() == 3);
  CHECK(d.ids() == std::vector<std::string>{"a", "b", "c"});
  CHECK(d.timestamp(0) == 1);
  CHECK(d.provenance().duplicates_dropped == 1);

  const auto distinct = tiny({"a", "b", "c"}, {1, 2, 3});
  CHECK(deduplicate(distinct).same_data(distinct));
  CHECK(deduplicate(tiny({"a", "a", "a", "a", "a"}, {1, 2, 3, 4, 5})).n_samples() == 1);
}

TEST_CASE("filter timestamps is inclusive") {
  const auto ds = tiny({"a", "b", "c"}, {10, 20, 30});
  const auto f = filter_timestamps(ds, 15, 35);
  CHECK(f.ids() == std::vector<std::string>{"b", "c"});
  CHECK(f.provenance().out_of_range_dropped == 1);
  CHECK(filter_timestamps(ds, 0, 100).same_data(ds));
  CHECK(filter_timestamps(tiny({"a", "b"}, {10, 20}), 100, 200).empty());
  CHECK(filter_timestamps(ds, 20, 20).n_samples() == 1);
}

TEST_CASE("anova f matches hand computation") {
  const std::vector<int> y{0, 0, 0, 1, 1, 1};
  const std::vector<double> x{1, 2, 3, 4, 5, 6};
  CHECK(anova_f(x, y) == doctest::Approx(13.5));

  const std::vector<int> y2{0, 0, 1, 1};
  const std::vector<double> constant{3, 3, 3, 3};
  CHECK(anova_f(constant, y2) == 0.0);
  const std::vector<double> separated{0, 0, 1, 1};
  CHECK(anova_f(separated, y2) == doctest::Approx(1.0 / kAnovaEpsilon).epsilon(1e-6));

  const std::vector<int> y3{0, 1, 1};
  const std::vector<double> short_x{1, 2, 3};
  CHECK_THROWS_AS(anova_f(short_x, y3), Error);
}

TEST_CASE("select k best ranks by F") {
  LabeledDataset ds(3);
  const double rows[4][3] = {{5, 0, 0.1}, {5, 0, 0.3}, {5, 1, 0.2}, {5, 1, 0.4}};
  for (int i = 0; i < 4; ++i) ds.add("s" + std::to_string(i), i, i >= 2 ? 1 : 0, "f", rows[i]);
  const auto sel = fit_select_k_best(ds, 2);
  CHECK(sel.selected_indices == std::vector<std::size_t>{1, 2});
  CHECK(sel.scores[0] == 0.0);
  const auto one = fit_select_k_best(ds, 1);
  CHECK(one.selected_indices == std::vector<std::size_t>{1});
  CHECK_THROWS_AS(fit_select_k_best(ds, 4), Error);
}

TEST_CASE("select k best on a wide input") {
  const std::size_t d = 2568;
  LabeledDataset ds(d);
  Rng rng(4);
  std::vector<double> row(d);
  for (int i = 0; i < 20; ++i) {
    for (auto& v : row) v = rng.normal();
    ds.add("s" + std::to_string(i), i, i % 2, "f", row);
  }
  const auto sel = fit_select_k_best(ds, 10);
  CHECK(sel.selected_indices.size() == 10);
  CHECK(apply_selector(ds, sel).n_features() == 10);
}

TEST_CASE("apply selector projects columns") {
  LabeledDataset ds(3);
  const double a[3] = {1, 7, 3};
  const double b[3] = {4, 7, 6};
  ds.add("a", 1, 0, "f", a);
  ds.add("b", 2, 1, "f", b);
  FeatureSelector sel;
  sel.selected_indices = {0, 2};
  const auto p = apply_selector(ds, sel);
  CHECK(p.n_features() == 2);
  CHECK(p.column(1) == std::vector<double>{3, 6});
  CHECK(p.provenance().selected_columns == std::vector<std::size_t>{0, 2});

  sel.selected_indices = {0, 1, 2};
  const auto all = apply_selector(ds, sel);
  for (std::size_t j = 0; j < 3; ++j) CHECK(all.column(j) == ds.column(j));

  sel.selected_indices = {1};
  CHECK(apply_selector(ds, sel).column(0) == std::vector<double>{7, 7});
  sel.selected_indices = {3};
  CHECK_THROWS_AS(apply_selector(ds, sel), Error);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
