#include <doctest.h>

#include <cmath>
#include <set>

#include "driftrules/common.hpp"

using namespace driftrules;

TEST_CASE("matrix row access and concat") {
  Matrix a(2, 3, {1, 2, 3, 4, 5, 6});
  CHECK(a.at(1, 2) == 6);
  CHECK(a.row(1)[0] == 4);
  CHECK(a.column(1) == std::vector<double>{2, 5});
  const std::vector<std::size_t> pick{1, 1};
  auto s = a.select_rows(pick);
  CHECK(s.rows() == 2);
  CHECK(s.at(0, 0) == 4);
  auto c = Matrix::concat(a, s);
  CHECK(c.rows() == 4);
  CHECK(c.at(3, 2) == 6);
  const std::vector<double> extra{7, 8, 9};
  c.append_row(extra);
  CHECK(c.rows() == 5);
  CHECK(c.at(4, 1) == 8);
  CHECK_THROWS_AS(Matrix::concat(a, Matrix(1, 2)), Error);
  CHECK_THROWS_AS(Matrix(2, 2, {1, 2, 3}), Error);
}

TEST_CASE("rng is reproducible and in range") {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
  Rng r(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(5);
    CHECK(v < 5);
    seen.insert(v);
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("rng normal has unit moments") {
  Rng r(11);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  const double mean = s / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(s2 / n - mean * mean - 1.0) < 0.02);
}

TEST_CASE("shuffle is a permutation") {
  Rng r(3);
  std::vector<int> v{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  r.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 10);
}

TEST_CASE("derive_seed separates streams") {
  CHECK(derive_seed(52, 0) != derive_seed(52, 1));
  CHECK(derive_seed(52, 1) != derive_seed(53, 1));
  CHECK(derive_seed(52, 1) == derive_seed(52, 1));
}
