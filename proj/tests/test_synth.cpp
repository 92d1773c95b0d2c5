#include <doctest.h>

#include <cmath>
#include <sstream>

#include "driftrules/data_shift.hpp"
#include "driftrules/synth.hpp"
#include "driftrules/windowing.hpp"

using namespace driftrules;

TEST_CASE("true shift series by kind") {
  CHECK(true_shift_series(stationary_schedule(12, 3)) == std::vector<double>(11, 0.0));

  const auto sudden = sudden_schedule("fam0", 12, 10, 2.0, 6);
  const auto s = true_shift_series(sudden);
  REQUIRE(s.size() == 11);
  for (std::size_t t = 0; t < 11; ++t) CHECK(s[t] == doctest::Approx(t == 5 ? 2.0 : 0.0));

  const auto gradual = gradual_schedule("fam0", 12, std::vector<double>{3.0, 4.0});
  for (const double v : true_shift_series(gradual)) CHECK(v == doctest::Approx(5.0 / 12.0));

  const auto ramp = gradual_schedule("fam0", 12, std::vector<double>{6.0}, 3, 9);
  const auto r = true_shift_series(ramp);
  for (std::size_t t = 0; t < 11; ++t) CHECK(r[t] == doctest::Approx(t >= 3 && t < 9 ? 1.0 : 0.0));

  const auto swap = swap_schedule("fam0", 12, 4, 6, 0, 1);
  const auto w = true_shift_series(swap);
  for (std::size_t t = 0; t < 11; ++t) CHECK(w[t] == (t == 5 ? kSwapTrueShift : 0.0));
}

TEST_CASE("schedule preconditions") {
  CHECK_THROWS_AS(sudden_schedule("f", 12, 3, 1.0, 0), Error);
  CHECK_THROWS_AS(sudden_schedule("f", 12, 3, 1.0, 12), Error);
  CHECK_THROWS_AS(gradual_schedule("f", 12, {1.0}, 5, 5), Error);
  CHECK_THROWS_AS(swap_schedule("f", 12, 3, 6, 1, 1), Error);
  CHECK_THROWS_AS(parse_drift_kind("wobble"), Error);
  CHECK(parse_drift_kind("importance_swap") == DriftKind::importance_swap);
}

TEST_CASE("generate is deterministic and shaped") {
  const auto specs = default_families(2, 4, 30, 7);
  const auto sched = sudden_schedule("fam0", 6, 4, 2.0, 3);
  const auto a = generate(specs, sched, 6, 10, 7);
  const auto b = generate(specs, sched, 6, 10, 7);
  CHECK(a.same_data(b));
  CHECK(a.n_samples() == 3 * 30 * 6);
  CHECK(a.n_features() == 4);
  std::ostringstream ca, cb;
  write_csv(a, ca);
  write_csv(b, cb);
  CHECK(ca.str() == cb.str());
  CHECK_FALSE(generate(specs, sched, 6, 10, 8).same_data(a));
  for (std::size_t i = 0; i < a.n_samples(); ++i) {
    CHECK(a.label(i) == (a.family(i) == "benign" ? 0 : 1));
    const auto w = (a.timestamp(i) - kDefaultEpoch) / (10 * kSecondsPerDay);
    CHECK(w >= 0);
    CHECK(w < 6);
  }
}

TEST_CASE("sudden drift moves only the drifting family") {
  const std::size_t d = 5, n = 2000;
  const auto specs = default_families(2, d, n, 3);
  const auto sched = sudden_schedule("fam0", 4, d, 2.0, 2);
  const auto ds = generate(specs, sched, 4, 10, 3);
  auto window_family = [&](std::size_t w, const std::string& f) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < ds.n_samples(); ++i) {
      const auto wi = static_cast<std::size_t>((ds.timestamp(i) - kDefaultEpoch) / (10 * kSecondsPerDay));
      if (wi == w && ds.family(i) == f) rows.push_back(i);
    }
    return ds.rows(rows);
  };
  const double noise = 3.0 * std::sqrt(2.0 * static_cast<double>(d) / static_cast<double>(n));
  CHECK(mean_l2(window_family(0, "fam0"), window_family(1, "fam0")) <= noise);
  CHECK(mean_l2(window_family(1, "fam0"), window_family(2, "fam0")) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(mean_l2(window_family(1, "fam1"), window_family(2, "fam1")) <= noise);
  CHECK(mean_l2(window_family(1, "benign"), window_family(2, "benign")) <= noise);
}

TEST_CASE("swap exchanges two columns of the family") {
  const auto specs = default_families(1, 3, 500, 5, 3.0);
  const auto sched = swap_schedule("fam0", 4, 3, 2, 0, 2);
  const auto ds = generate(specs, sched, 4, 10, 5);
  double before[3] = {0, 0, 0}, after[3] = {0, 0, 0};
  for (std::size_t i = 0; i < ds.n_samples(); ++i) {
    if (ds.family(i) != "fam0") continue;
    const auto w = (ds.timestamp(i) - kDefaultEpoch) / (10 * kSecondsPerDay);
    for (std::size_t j = 0; j < 3; ++j) (w < 2 ? before : after)[j] += ds.value(i, j) / 1000.0;
  }
  CHECK(after[0] == doctest::Approx(before[2]).epsilon(0.1));
  CHECK(after[2] == doctest::Approx(before[0]).epsilon(0.1));
}

TEST_CASE("truth json carries the schedule") {
  const auto specs = default_families(1, 2, 10, 1);
  const auto sched = sudden_schedule("fam0", 5, 2, 1.0, 2);
  const auto j = truth_json(specs, sched, 30, 1);
  CHECK(j["schedule"]["kind"] == "sudden");
  CHECK(j["true_shift"].size() == 4);
  CHECK(j["families"].size() == 2);
}
