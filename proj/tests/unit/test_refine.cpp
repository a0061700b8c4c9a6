#include <doctest.h>

#include "cowtopo/refine.hpp"
#include "support/phantoms.hpp"

using namespace cowtopo;

namespace {

bool subset(const Mask& a, const Mask& b) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] && !b[i]) return false;
  return true;
}

bool is_26_path(const std::vector<Index3>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const auto& a = pts[i - 1];
    const auto& b = pts[i];
    if (std::abs(a.z - b.z) > 1 || std::abs(a.y - b.y) > 1 || std::abs(a.x - b.x) > 1) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("segment rasterization") {
  auto s = rasterize_segment({0, 0, 0}, {3, -7, 2});
  CHECK(s.front() == Index3{0, 0, 0});
  CHECK(s.back() == Index3{3, -7, 2});
  CHECK(s.size() == 8);
  CHECK(is_26_path(s));
  CHECK(rasterize_segment({1, 2, 3}, {1, 2, 3}).size() == 1);
}

TEST_CASE("config validation") {
  RefineConfig c;
  CHECK_NOTHROW(c.validate());
  c.t_com = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = {};
  c.t_dis = 0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("empty and single component are unchanged") {
  const Mask empty({5, 5, 5}, {}, 0);
  auto r0 = refine_class(empty);
  CHECK(r0.report.action == RefineAction::Unchanged);
  CHECK(count_nonzero(r0.mask) == 0);

  const Mask one = phantom::single_component();
  REQUIRE(count_nonzero(one) == 100);
  auto r = refine_class(one);
  CHECK(r.report.action == RefineAction::Unchanged);
  CHECK(r.mask == one);
  CHECK(r.report.voxels_added == 0);
}

TEST_CASE("bridgeable pair") {
  const Mask m = phantom::bridgeable_pair();
  auto r = refine_class(m);
  CHECK(r.report.action == RefineAction::Bridged);
  CHECK(r.report.components_before == 2);
  CHECK(r.report.components_after == 1);
  CHECK(count_components(r.mask) == 1);
  CHECK(subset(m, r.mask));
  CHECK(r.report.voxels_added > 0);
  CHECK(r.report.voxels_removed == 0);
  REQUIRE(r.report.endpoint_distance);
  CHECK(*r.report.endpoint_distance == doctest::Approx(6.0));
}

TEST_CASE("sub-threshold pair is zeroed") {
  auto r = refine_class(phantom::sub_threshold_pair());
  CHECK(r.report.action == RefineAction::Zeroed);
  CHECK(count_nonzero(r.mask) == 0);
  CHECK(r.report.voxels_removed == 13);
}

TEST_CASE("far pair keeps the larger") {
  const Mask m = phantom::far_pair();
  auto r = refine_class(m);
  CHECK(r.report.action == RefineAction::KeptLargest);
  CHECK(*r.report.endpoint_distance == doctest::Approx(40.0));
  CHECK(count_nonzero(r.mask) == 50);
  CHECK(count_components(r.mask) == 1);
  CHECK(subset(r.mask, m));
  // millimetre mode with fine spacing brings the gap under t_dis
  RefineConfig mm;
  mm.t_dis_unit = DistanceUnit::Millimeter;
  Mask fine = m;
  fine.set_spacing({0.2, 0.2, 0.2});
  CHECK(refine_class(fine, mm).report.action == RefineAction::Bridged);
}

TEST_CASE("one meaningful component keeps it") {
  Mask m({40, 5, 5}, {}, 0);
  phantom::fill_box<std::uint8_t>(m, {0, 2, 2}, {24, 2, 2});
  phantom::fill_box<std::uint8_t>(m, {28, 2, 2}, {30, 2, 2});
  auto r = refine_class(m);
  CHECK(r.report.action == RefineAction::KeptLargest);
  CHECK(count_nonzero(r.mask) == 25);
}

TEST_CASE("more than two components") {
  const Mask m = phantom::four_components();
  REQUIRE(count_components(m) == 4);
  auto r = refine_class(m);
  CHECK(r.report.action == RefineAction::ReducedThenBridged);
  CHECK(r.report.components_before == 4);
  CHECK(count_components(r.mask) == 1);
  CHECK(r.mask(11, 4, 9) == 0);
  CHECK(r.mask(100, 9, 9) == 0);
  CHECK(r.report.voxels_removed == 5);
}

TEST_CASE("blocked bridge degrades") {
  const Mask m = phantom::bridgeable_pair();
  Mask wall = Mask::like(m, 0);
  phantom::fill_box<std::uint8_t>(wall, {29, 0, 0}, {29, 8, 8});
  auto r = refine_class(m, {}, &wall);
  CHECK(r.report.action == RefineAction::KeptLargest);
  CHECK(count_components(r.mask) == 1);
}

TEST_CASE("spline bridge") {
  RefineConfig cfg;
  cfg.bridge_shape = BridgeShape::Spline;
  const Mask m = phantom::bridgeable_pair();
  auto r = refine_class(m, cfg);
  CHECK(r.report.action == RefineAction::Bridged);
  CHECK(subset(m, r.mask));

  // offset tubes: the curve still joins them
  Mask bent({60, 12, 12}, {}, 0);
  phantom::fill_box<std::uint8_t>(bent, {2, 3, 3}, {26, 3, 3});
  phantom::fill_box<std::uint8_t>(bent, {31, 7, 6}, {55, 7, 6});
  auto rb = refine_class(bent, cfg);
  CHECK(rb.report.action == RefineAction::Bridged);
  CHECK(count_components(rb.mask) == 1);
}

TEST_CASE("component count never increases") {
  for (const Mask& m : {phantom::single_component(), phantom::bridgeable_pair(),
                        phantom::sub_threshold_pair(), phantom::far_pair(),
                        phantom::four_components()}) {
    auto r = refine_class(m);
    CHECK(r.report.components_after <= r.report.components_before);
    if (r.report.voxels_added > 0)
      CHECK((r.report.action == RefineAction::Bridged ||
             r.report.action == RefineAction::ReducedThenBridged));
  }
}

TEST_CASE("refine_volume") {
  const ClassMap map;
  const LabelVolume split = phantom::split_pcom();
  auto [out, rep] = refine_volume(split);
  REQUIRE(rep.classes.size() == 3);
  CHECK(rep.classes[0].cls == CowClass::RPcom);
  CHECK(rep.classes[1].cls == CowClass::LPcom);
  CHECK(rep.classes[2].cls == CowClass::Acom);
  CHECK(rep.classes[1].action == RefineAction::Bridged);

  const LabelId pcom = map.id(CowClass::LPcom);
  std::size_t pcom_voxels = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (split[i] != pcom) CHECK((out[i] == split[i] || (split[i] == 0 && out[i] == pcom)));
    pcom_voxels += split[i] == pcom;
  }
  CHECK(count_components(one_hot(out, CowClass::LPcom)) == 1);
  CHECK(rep.classes[1].voxels_added * 100 < pcom_voxels);

  auto [again, rep2] = refine_volume(out);
  CHECK(again == out);
  CHECK(rep2.classes[1].action == RefineAction::Unchanged);

  auto [same, rep3] = refine_volume(phantom::pcom_ground_truth());
  CHECK(same == phantom::pcom_ground_truth());
}

TEST_CASE("refine_volume never overwrites other classes") {
  const ClassMap map;
  LabelVolume v({60, 9, 9}, {}, 0);
  const Mask pair = phantom::bridgeable_pair();
  for (std::size_t i = 0; i < v.size(); ++i)
    if (pair[i]) v[i] = map.id(CowClass::Acom);
  phantom::fill_box<LabelId>(v, {29, 0, 0}, {29, 8, 8}, map.id(CowClass::BA));
  auto [out, rep] = refine_volume(v);
  CHECK(rep.classes[2].action == RefineAction::KeptLargest);
  CHECK(count_nonzero(one_hot(out, CowClass::BA)) == 81);
}
