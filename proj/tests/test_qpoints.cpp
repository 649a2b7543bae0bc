#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "qlab/qpoint.hpp"

using namespace qlab;

namespace {

QPoint random_qpoint(std::mt19937_64& rng, int q, int n, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> flat(static_cast<size_t>(q) * n);
  for (double& x : flat) x = u(rng);
  return QPoint(q, n, std::move(flat));
}

}  // namespace

TEST_CASE("g_distance on the stated examples") {
  // Same multiset in different order.
  QPoint a(2, 2, {0, 0, 1, 0});
  QPoint b(2, 2, {1, 0, 0, 0});
  CHECK(g_distance(a, b) == 0.0);
  CHECK(a == b);

  // Single sheet: plain Euclidean distance.
  QPoint c(1, 3, {0, 0, 0});
  QPoint d(1, 3, {3, 4, 0});
  CHECK(g_distance(c, d) == doctest::Approx(5.0));

  // Q=2 in R^1: {0,2} vs {1,3}: identity costs 2, swap costs 10.
  QPoint e(2, 1, {0, 2});
  QPoint f(2, 1, {1, 3});
  CHECK(g_distance(e, f) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("g_distance rejects mismatched shapes") {
  QPoint a(2, 1, {0, 1});
  QPoint b(2, 2, {0, 0, 1, 1});
  QPoint c(3, 1, {0, 1, 2});
  CHECK_THROWS_AS(g_distance(a, b), DimensionMismatch);
  CHECK_THROWS_AS(g_distance(a, c), DimensionMismatch);
}

TEST_CASE("best_matching examples and tie-breaking") {
  QPoint a(2, 1, {0, 2});
  const Matching id = best_matching(a, a);
  CHECK(id.cost == 0.0);
  CHECK(id.perm == std::vector<int>{0, 1});

  QPoint b(2, 1, {1, 3});
  const Matching m = best_matching(a, b);
  CHECK(m.cost == doctest::Approx(2.0));
  CHECK(m.perm == std::vector<int>{0, 1});

  // All sheets coincide: every permutation ties; the lexicographically
  // smallest (identity) must be returned.
  QPoint c(3, 1, {5, 5, 5});
  QPoint d(3, 1, {7, 7, 7});
  CHECK(best_matching(c, d).perm == std::vector<int>{0, 1, 2});
  QPoint e(5, 1, {1, 1, 1, 1, 1});
  QPoint f(5, 1, {2, 2, 2, 2, 2});
  CHECK(best_matching(e, f).perm == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("matching cost equals exhaustive enumeration on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> qd(1, 6), nd(1, 4);
  for (int trial = 0; trial < 400; ++trial) {
    const int q = qd(rng);
    const int n = nd(rng);
    const QPoint a = random_qpoint(rng, q, n);
    const QPoint b = random_qpoint(rng, q, n);
    const Matching m = best_matching(a, b);
    const double oracle = qlab_test::exhaustive_matching_cost(a, b);
    CHECK(m.cost == doctest::Approx(oracle).epsilon(1e-12));
    CHECK(g_distance(a, b) == doctest::Approx(std::sqrt(oracle)).epsilon(1e-12));
  }
}

TEST_CASE("g_distance is a metric on random triples") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> qd(2, 6), nd(1, 3);
  for (int trial = 0; trial < 200; ++trial) {
    const int q = qd(rng);
    const int n = nd(rng);
    const QPoint a = random_qpoint(rng, q, n);
    const QPoint b = random_qpoint(rng, q, n);
    const QPoint c = random_qpoint(rng, q, n);
    const double ab = g_distance(a, b);
    const double ba = g_distance(b, a);
    const double ac = g_distance(a, c);
    const double cb = g_distance(c, b);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= ac + cb + 1e-12);
    CHECK(g_distance(a, a) == 0.0);
  }
}

TEST_CASE("permutation invariance via canonical form") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    const QPoint a = random_qpoint(rng, 4, 2);
    std::vector<double> shuffled(a.flat());
    // Rotate the sheets: a nontrivial permutation of the value list.
    std::rotate(shuffled.begin(), shuffled.begin() + 2, shuffled.end());
    const QPoint b(4, 2, shuffled);
    CHECK(a == b);
    CHECK(g_distance(a, b) == 0.0);
  }
}

TEST_CASE("best_matching agrees with g_distance") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const QPoint a = random_qpoint(rng, 5, 2);
    const QPoint b = random_qpoint(rng, 5, 2);
    const double g = g_distance(a, b);
    const Matching m = best_matching(a, b);
    CHECK(g * g == doctest::Approx(m.cost).epsilon(1e-12));
  }
}

TEST_CASE("mean") {
  QPoint a(2, 2, {1, 2, -1, -2});
  CHECK(mean(a) == std::vector<double>{0, 0});
  QPoint b(2, 2, {3, 1, 3, 1});
  CHECK(mean(b) == std::vector<double>{3, 1});
  QPoint c(2, 2, {0, 0, 2, 0});
  CHECK(mean(c) == std::vector<double>{1, 0});
}

TEST_CASE("separation") {
  QPoint a(2, 2, {1, 1, 1, 1});
  CHECK(separation(a) == 0.0);
  QPoint b(2, 1, {0, 2});
  CHECK(separation(b) == doctest::Approx(2.0));
  // Square-root sheets at z = 1: {1, -1}.
  QPoint c(2, 2, {1, 0, -1, 0});
  CHECK(separation(c) == doctest::Approx(2.0));
  QPoint d(1, 1, {0});
  CHECK_THROWS_AS(separation(d), UndefinedSeparation);
}

TEST_CASE("approx_equal tolerates coordinate-wise perturbations") {
  QPoint a(2, 2, {0, 0, 1, 0});
  QPoint b(2, 2, {1e-7, 0, 1, 1e-7});
  CHECK(QPoint::approx_equal(a, b, 1e-6));
  CHECK(!QPoint::approx_equal(a, b, 1e-8));
}
