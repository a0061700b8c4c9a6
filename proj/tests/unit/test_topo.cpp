#include <doctest.h>

#include <set>

#include "cowtopo/topo.hpp"
#include "support/oracles.hpp"

using namespace cowtopo;

namespace {

Mask blank(std::size_t nz, std::size_t ny, std::size_t nx) { return Mask({nz, ny, nx}, {}, 0); }

Mask box(Shape shape, Index3 lo, Index3 hi) {
  Mask m(shape, {}, 0);
  for (auto z = lo.z; z <= hi.z; ++z)
    for (auto y = lo.y; y <= hi.y; ++y)
      for (auto x = lo.x; x <= hi.x; ++x) m(z, y, x) = 1;
  return m;
}

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

bool has_full_neighbourhood(const Mask& m) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (!m[i]) continue;
    const Index3 p = m.coord(i);
    bool full = true;
    for (int dz = -1; dz <= 1 && full; ++dz)
      for (int dy = -1; dy <= 1 && full; ++dy)
        for (int dx = -1; dx <= 1 && full; ++dx) {
          const Index3 q{p.z + dz, p.y + dy, p.x + dx};
          if (!m.contains(q) || !m.at(q)) full = false;
        }
    if (full) return true;
  }
  return false;
}

}  // namespace

TEST_SUITE("connected_components") {
  TEST_CASE("two distant voxels") {
    Mask m = blank(6, 6, 6);
    m(0, 0, 0) = 1;
    m(5, 5, 5) = 1;
    CHECK(connected_components(m).count() == 2);
  }

  TEST_CASE("diagonal pair depends on connectivity") {
    Mask m = blank(2, 2, 2);
    m(0, 0, 0) = 1;
    m(1, 1, 1) = 1;
    CHECK(connected_components(m, Connectivity::TwentySix).count() == 1);
    CHECK(connected_components(m, Connectivity::Eighteen).count() == 2);
    CHECK(connected_components(m, Connectivity::Six).count() == 2);
  }

  TEST_CASE("edge-diagonal pair joins under 18 but not 6") {
    Mask m = blank(1, 2, 2);
    m(0, 0, 0) = 1;
    m(0, 1, 1) = 1;
    CHECK(count_components(m, Connectivity::Eighteen) == 1);
    CHECK(count_components(m, Connectivity::Six) == 2);
  }

  TEST_CASE("ids are size-descending with smallest-index tie break") {
    Mask m = blank(1, 1, 12);
    m(0, 0, 0) = 1;                     // size 1
    m(0, 0, 2) = m(0, 0, 3) = 1;        // size 2, first index 2
    m(0, 0, 6) = m(0, 0, 7) = 1;        // size 2, first index 6
    m(0, 0, 9) = m(0, 0, 10) = m(0, 0, 11) = 1;  // size 3
    const auto cs = connected_components(m);
    REQUIRE(cs.count() == 4);
    CHECK(cs.sizes == std::vector<std::size_t>{3, 2, 2, 1});
    CHECK(cs.labels(0, 0, 9) == 1);
    CHECK(cs.labels(0, 0, 2) == 2);
    CHECK(cs.labels(0, 0, 6) == 3);
    CHECK(cs.labels(0, 0, 0) == 4);
  }

  TEST_CASE("matches flood-fill oracle on random masks") {
    for (int conn : {6, 18, 26}) {
      for (std::uint32_t seed = 0; seed < 12; ++seed) {
        const Mask m = oracle::random_mask({20, 20, 20}, 0.3, seed * 7 + conn);
        int n = 0;
        const auto ref = oracle::flood_fill_labels(m, conn, n);
        const auto cs = connected_components(m, connectivity_from_int(conn));
        CHECK(cs.count() == static_cast<std::size_t>(n));
        CHECK(oracle::same_partition(ref, cs.labels.storage()));
        std::size_t total = 0;
        for (auto s : cs.sizes) total += s;
        CHECK(total == count_nonzero(m));
      }
    }
  }

  TEST_CASE("empty mask") {
    const Mask m = blank(3, 3, 3);
    CHECK(connected_components(m).count() == 0);
    CHECK(count_nonzero(largest_component(m)) == 0);
  }
}

TEST_SUITE("largest_component") {
  TEST_CASE("keeps the bigger blob") {
    Mask m = box({10, 10, 10}, {0, 0, 0}, {1, 4, 4});  // 50 voxels
    m(8, 8, 8) = m(8, 8, 9) = m(8, 9, 9) = 1;
    const Mask l = largest_component(m);
    CHECK(count_nonzero(l) == 50);
    CHECK(l(8, 8, 8) == 0);
  }

  TEST_CASE("single component is unchanged") {
    const Mask m = box({5, 5, 5}, {1, 1, 1}, {3, 3, 3});
    CHECK(largest_component(m) == m);
  }

  TEST_CASE("tie goes to the smallest linear index") {
    // Enumerate every placement of two equal 2-voxel bars in a 1x1x8 line.
    for (int a = 0; a < 8; ++a)
      for (int b = a + 3; b + 1 < 8; ++b) {
        Mask m = blank(1, 1, 8);
        m(0, 0, a) = m(0, 0, a + 1) = 1;
        m(0, 0, b) = m(0, 0, b + 1) = 1;
        const Mask l = largest_component(m);
        CHECK(l(0, 0, a) == 1);
        CHECK(l(0, 0, b) == 0);
      }
  }
}

TEST_SUITE("edt") {
  TEST_CASE("one step along x") {
    Mask m = blank(1, 1, 3);
    m(0, 0, 0) = 1;
    const auto d = edt(m, {0.6, 0.3525, 0.3525});
    CHECK(d(0, 0, 0) == 0.0);
    CHECK(d(0, 0, 1) == doctest::Approx(0.3525).epsilon(1e-12));
    CHECK(d(0, 0, 2) == doctest::Approx(0.705).epsilon(1e-12));
  }

  TEST_CASE("empty reference throws") {
    CHECK_THROWS_WITH_AS(edt(blank(2, 2, 2), {}), "empty reference set", ValidationError);
  }

  TEST_CASE("matches brute force on random references") {
    const Spacing sp{0.6, 0.3525, 0.41};
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
      const double density = seed % 3 == 0 ? 0.002 : 0.05;
      Mask m = oracle::random_mask({16, 16, 16}, density, 1000 + seed);
      m(seed % 16, 3, 5) = 1;
      const auto d = edt(m, sp);
      const auto ref = oracle::brute_edt(m, sp);
      double worst = 0;
      for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(d[i] - ref[i]));
      CHECK(worst <= 1e-6);
      for (std::size_t i = 0; i < m.size(); ++i) CHECK((d[i] == 0.0) == (m[i] != 0));
    }
  }

  TEST_CASE("axis permutation symmetry") {
    const Mask m = oracle::random_mask({5, 7, 9}, 0.05, 42);
    Mask t({9, 7, 5}, {}, 0);  // swap z and x
    for (std::size_t z = 0; z < 5; ++z)
      for (std::size_t y = 0; y < 7; ++y)
        for (std::size_t x = 0; x < 9; ++x) t(x, y, z) = m(z, y, x);
    const auto a = edt(m, {0.6, 0.4, 0.3});
    const auto b = edt(t, {0.3, 0.4, 0.6});
    for (std::size_t z = 0; z < 5; ++z)
      for (std::size_t y = 0; y < 7; ++y)
        for (std::size_t x = 0; x < 9; ++x) CHECK(a(z, y, x) == doctest::Approx(b(x, y, z)));
  }
}

TEST_SUITE("skeletonize") {
  TEST_CASE("single voxel is its own endpoint") {
    Mask m = blank(3, 3, 3);
    m(1, 1, 1) = 1;
    const auto sk = skeletonize(m);
    CHECK(sk.centerline == m);
    REQUIRE(sk.endpoints.size() == 1);
    CHECK(sk.endpoints[0] == Index3{1, 1, 1});
  }

  TEST_CASE("thin line is already a skeleton") {
    const Mask m = box({30, 3, 3}, {0, 1, 1}, {29, 1, 1});
    const auto sk = skeletonize(m);
    CHECK(sk.centerline == m);
    CHECK(sk.endpoints.size() == 2);
  }

  TEST_CASE("3x3x30 tube thins to one path with two endpoints") {
    const Mask m = box({30, 5, 5}, {0, 1, 1}, {29, 3, 3});
    const auto sk = skeletonize(m);
    CHECK(subset(sk.centerline, m));
    CHECK(count_components(sk.centerline) == 1);
    CHECK(sk.endpoints.size() == 2);
    CHECK_FALSE(has_full_neighbourhood(sk.centerline));
    // A path: every voxel has at most two skeleton neighbours.
    CHECK(skeleton_endpoints(sk.centerline).size() == 2);
    CHECK(count_nonzero(sk.centerline) >= 20);
  }

  TEST_CASE("hollow ring keeps its tunnel") {
    Mask m = box({3, 9, 9}, {0, 0, 0}, {2, 8, 8});
    for (int y = 3; y <= 5; ++y)
      for (int x = 3; x <= 5; ++x)
        for (int z = 0; z < 3; ++z) m(z, y, x) = 0;
    const auto sk = skeletonize(m);
    const Mask& c = sk.centerline;
    CHECK(count_components(c) == 1);
    // A closed loop has no endpoints.
    CHECK(sk.endpoints.empty());
  }

  TEST_CASE("random masks keep component count and subset property") {
    for (std::uint32_t seed = 0; seed < 8; ++seed) {
      const Mask m = dilate(oracle::random_mask({14, 14, 14}, 0.01, 77 + seed), 1);
      const auto sk = skeletonize(m);
      CHECK(subset(sk.centerline, m));
      CHECK(count_components(sk.centerline) == count_components(m));
      CHECK_FALSE(has_full_neighbourhood(sk.centerline));
    }
  }

  TEST_CASE("deterministic") {
    const Mask m = dilate(oracle::random_mask({12, 12, 12}, 0.02, 5), 1);
    CHECK(skeletonize(m).centerline == skeletonize(m).centerline);
  }
}

TEST_SUITE("dilate") {
  TEST_CASE("radius 0 is identity") {
    const Mask m = oracle::random_mask({6, 6, 6}, 0.2, 3);
    CHECK(dilate(m, 0) == m);
  }

  TEST_CASE("radius 1 ball has 7 voxels") {
    Mask m = blank(5, 5, 5);
    m(2, 2, 2) = 1;
    CHECK(count_nonzero(dilate(m, 1)) == 7);
  }

  TEST_CASE("radius 2 ball matches enumeration") {
    Mask m = blank(7, 7, 7);
    m(3, 3, 3) = 1;
    std::size_t expected = 0;
    for (int dz = -2; dz <= 2; ++dz)
      for (int dy = -2; dy <= 2; ++dy)
        for (int dx = -2; dx <= 2; ++dx) expected += dz * dz + dy * dy + dx * dx <= 4;
    CHECK(count_nonzero(dilate(m, 2)) == expected);
  }

  TEST_CASE("monotone and extensive") {
    for (std::uint32_t seed = 0; seed < 10; ++seed) {
      const Mask a = oracle::random_mask({10, 10, 10}, 0.03, seed);
      Mask b = a;
      const Mask extra = oracle::random_mask({10, 10, 10}, 0.03, seed + 100);
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = b[i] | extra[i];
      CHECK(subset(a, dilate(a, 1)));
      CHECK(subset(dilate(a, 1), dilate(b, 1)));
      CHECK(subset(dilate(a, 2), dilate(b, 2)));
    }
  }

  TEST_CASE("commutes with translation") {
    Mask a = blank(12, 12, 12), b = blank(12, 12, 12);
    a(4, 4, 4) = a(4, 5, 6) = 1;
    b(5, 6, 7) = b(5, 7, 9) = 1;  // shifted by (1, 2, 3)
    const Mask da = dilate(a, 2), db = dilate(b, 2);
    for (int z = 0; z + 1 < 12; ++z)
      for (int y = 0; y + 2 < 12; ++y)
        for (int x = 0; x + 3 < 12; ++x) CHECK(da(z, y, x) == db(z + 1, y + 2, x + 3));
  }

  TEST_CASE("negative radius throws") { CHECK_THROWS_AS(dilate(blank(2, 2, 2), -1), ValidationError); }
}

TEST_CASE("simple point characterization on small configurations") {
  Mask m = blank(3, 3, 3);
  m(1, 1, 1) = 1;
  CHECK_FALSE(is_simple_point(m, {1, 1, 1}));  // isolated point
  m(1, 1, 2) = 1;
  CHECK(is_simple_point(m, {1, 1, 1}));  // line end
  m(1, 1, 0) = 1;
  CHECK_FALSE(is_simple_point(m, {1, 1, 1}));  // line interior
}
