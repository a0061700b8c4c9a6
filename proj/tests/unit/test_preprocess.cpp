#include <doctest.h>

#include <random>
#include <set>

#include "cowtopo/preprocess.hpp"

using namespace cowtopo;

namespace {

Volume random_volume(Shape shape, Spacing sp, float lo, float hi, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> d(lo, hi);
  Volume v(shape, sp, 0.0f);
  for (float& x : v.storage()) x = d(rng);
  return v;
}

const Spacing kTarget{0.6, 0.3525, 0.3525};

}  // namespace

TEST_SUITE("truncate") {
  TEST_CASE("modality windows") {
    Volume v({1, 1, 4}, kTarget, 0.0f);
    v[0] = 2500.0f;
    v[1] = 300.0f;
    v[2] = -5.0f;
    v[3] = -3000.0f;
    const Volume cta = truncate(v, Modality::CTA);
    CHECK(cta[0] == 1800.0f);
    CHECK(cta[1] == 300.0f);
    CHECK(cta[2] == -5.0f);
    CHECK(cta[3] == -1000.0f);
    const Volume mra = truncate(v, Modality::MRA);
    CHECK(mra[0] == 700.0f);
    CHECK(mra[2] == 0.0f);
  }

  TEST_CASE("idempotent and monotone") {
    const Volume v = random_volume({4, 4, 4}, kTarget, -3000, 3000, 1);
    const Volume once = truncate(v, Modality::CTA);
    CHECK(truncate(once, Modality::CTA) == once);
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = 0; j < v.size(); ++j)
        if (v[i] <= v[j]) CHECK(once[i] <= once[j]);
  }
}

TEST_SUITE("resample") {
  TEST_CASE("target spacing is identity") {
    const Volume v = random_volume({5, 6, 7}, kTarget, 0, 1, 2);
    const Volume r = resample(v);
    CHECK(r.shape() == v.shape());
    CHECK(r == v);
  }

  TEST_CASE("z extent doubles when dz halves") {
    const Volume v({100, 4, 4}, {1.2, 0.3525, 0.3525}, 1.0f);
    const Volume r = resample(v);
    CHECK(r.shape() == Shape{200, 4, 4});
    CHECK(r.spacing() == kTarget);
    for (float x : r.data()) CHECK(x == doctest::Approx(1.0f));
  }

  TEST_CASE("extent never drops below one") {
    const Volume v({1, 1, 1}, {0.01, 0.01, 0.01}, 3.0f);
    CHECK(resample(v).shape() == Shape{1, 1, 1});
  }

  TEST_CASE("trilinear reproduces a linear ramp in the interior") {
    Volume v({4, 4, 8}, {0.6, 0.3525, 0.705}, 0.0f);
    for (std::size_t z = 0; z < 4; ++z)
      for (std::size_t y = 0; y < 4; ++y)
        for (std::size_t x = 0; x < 8; ++x) v(z, y, x) = static_cast<float>(x);
    const Volume r = resample(v);
    CHECK(r.shape().nx == 16);
    // Output voxel o sits at input coordinate (o + 0.5) / 2 - 0.5.
    for (std::size_t x = 1; x + 1 < 16; ++x)
      CHECK(r(0, 0, x) == doctest::Approx((x + 0.5) / 2.0 - 0.5));
  }

  TEST_CASE("label resampling never invents ids") {
    std::mt19937 rng(4);
    LabelVolume l({7, 9, 11}, {0.9, 0.5, 0.2}, 0);
    for (auto& v : l.storage()) v = static_cast<LabelId>(rng() % 4 == 0 ? 3 + rng() % 3 : 0);
    const LabelVolume r = resample(l);
    const std::set<LabelId> in(l.data().begin(), l.data().end());
    for (LabelId v : r.data()) CHECK(in.count(v) == 1);
  }

  TEST_CASE("labels at target spacing are bit-identical") {
    LabelVolume l({3, 3, 3}, kTarget, 0);
    l[5] = 10;
    CHECK(resample(l) == l);
  }

  TEST_CASE("sform columns follow the new spacing") {
    Volume v({10, 10, 10}, {1.2, 0.705, 0.705}, 0.0f);
    WorldMeta w;
    w.sform_code = 1;
    w.srow = {{{0.705f, 0, 0, 0}, {0, 0.705f, 0, 0}, {0, 0, 1.2f, 0}}};
    v.set_world(w);
    const Volume r = resample(v);
    CHECK(r.world().srow[0][0] == doctest::Approx(0.3525));
    CHECK(r.world().srow[2][2] == doctest::Approx(0.6));
    // New voxel 0 centre lies a quarter old voxel before the old centre.
    CHECK(r.world().srow[2][3] == doctest::Approx(-0.3));
  }

  TEST_CASE("bad config rejected") {
    PreprocessConfig cfg;
    cfg.label_order = 1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = {};
    cfg.cta_window = {5, 5};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
  }
}

TEST_SUITE("normalize") {
  TEST_CASE("window endpoints map to 0 and 1") {
    Volume v({1, 1, 3}, kTarget, 0.0f);
    v[0] = -1000.0f;
    v[1] = 400.0f;
    v[2] = 1800.0f;
    const Volume n = normalize(v);
    CHECK(n[0] == 0.0f);
    CHECK(n[1] == doctest::Approx(0.5));
    CHECK(n[2] == 1.0f);
  }

  TEST_CASE("constant volume maps to zeros") {
    const Volume n = normalize(Volume({3, 3, 3}, kTarget, 500.0f));
    for (float x : n.data()) CHECK(x == 0.0f);
  }

  TEST_CASE("range is [0,1]") {
    const Volume n = normalize(random_volume({6, 6, 6}, kTarget, -50, 900, 8));
    for (float x : n.data()) CHECK((x >= 0.0f && x <= 1.0f));
  }
}

TEST_SUITE("preprocess_case") {
  TEST_CASE("output spacing and range") {
    const Volume v = random_volume({12, 20, 20}, {1.0, 0.5, 0.5}, -2000, 3000, 5);
    const Volume out = preprocess_case(v, Modality::CTA);
    CHECK(out.spacing().dz == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(out.spacing().dy == doctest::Approx(0.3525).epsilon(1e-12));
    for (float x : out.data()) CHECK((x >= 0.0f && x <= 1.0f));
  }

  TEST_CASE("constant phantoms of both modalities map to zeros") {
    const Volume cta = preprocess_case(Volume({4, 4, 4}, {1, 1, 1}, 500.0f), Modality::CTA);
    const Volume mra = preprocess_case(Volume({4, 4, 4}, {1, 1, 1}, 500.0f), Modality::MRA);
    CHECK(cta.spacing() == mra.spacing());
    for (float x : cta.data()) CHECK(x == 0.0f);
    for (float x : mra.data()) CHECK(x == 0.0f);
  }

  TEST_CASE("idempotent on its own output") {
    for (std::uint32_t seed = 0; seed < 6; ++seed) {
      const Modality m = seed % 2 ? Modality::MRA : Modality::CTA;
      const Volume v = random_volume({8, 10, 9}, {0.9, 0.45, 0.6}, -1500, 2500, 20 + seed);
      const Volume once = preprocess_case(v, m);
      const Volume twice = preprocess_case(once, m);
      CHECK(twice == once);
    }
  }
}
