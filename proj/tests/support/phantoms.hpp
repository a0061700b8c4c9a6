#pragma once

// Constructed volumes shared by unit and acceptance tests.

#include "cowtopo/volume.hpp"

namespace phantom {

using namespace cowtopo;

template <class T>
inline void fill_box(Grid<T>& g, Index3 lo, Index3 hi, T v = T{1}) {
  for (auto z = lo.z; z <= hi.z; ++z)
    for (auto y = lo.y; y <= hi.y; ++y)
      for (auto x = lo.x; x <= hi.x; ++x) g(z, y, x) = v;
}

/// 4x5x5 solid block: one component of 100 voxels.
inline Mask single_component() {
  Mask m({10, 10, 10}, {}, 0);
  fill_box<std::uint8_t>(m, {3, 2, 2}, {6, 6, 6});
  return m;
}

/// Two colinear 1x1x25 tubes along z with a 5-voxel gap (z = 25..29).
inline Mask bridgeable_pair() {
  Mask m({60, 9, 9}, {}, 0);
  fill_box<std::uint8_t>(m, {2, 4, 4}, {26, 4, 4});
  fill_box<std::uint8_t>(m, {32, 4, 4}, {56, 4, 4});
  return m;
}

/// Components of 5 and 8 voxels.
inline Mask sub_threshold_pair() {
  Mask m({20, 9, 9}, {}, 0);
  fill_box<std::uint8_t>(m, {2, 4, 4}, {6, 4, 4});
  fill_box<std::uint8_t>(m, {10, 4, 4}, {17, 4, 4});
  return m;
}

/// Two 50-voxel lines 40 voxels apart along y; the second one is offset by
/// one voxel in z so the larger-first order is decided by the raster tie rule.
inline Mask far_pair() {
  Mask m({5, 46, 53}, {}, 0);
  fill_box<std::uint8_t>(m, {2, 2, 1}, {2, 2, 50});
  fill_box<std::uint8_t>(m, {2, 42, 1}, {2, 42, 50});
  return m;
}

/// Lines of 60 and 55 voxels with endpoints 4 apart, plus specks of 3 and 2.
inline Mask four_components() {
  Mask m({125, 12, 12}, {}, 0);
  fill_box<std::uint8_t>(m, {2, 4, 4}, {61, 4, 4});
  fill_box<std::uint8_t>(m, {65, 4, 4}, {119, 4, 4});
  fill_box<std::uint8_t>(m, {10, 4, 9}, {12, 4, 9});
  fill_box<std::uint8_t>(m, {100, 9, 9}, {101, 9, 9});
  return m;
}

/// Ground-truth label volume with L-ICA, L-PCA and a thick L-Pcom tube
/// joining them, plus an unrelated BA segment.
inline LabelVolume pcom_ground_truth() {
  const ClassMap map;
  LabelVolume v({20, 24, 80}, {0.6, 0.3525, 0.3525}, 0);
  fill_box<LabelId>(v, {4, 4, 2}, {12, 10, 8}, map.id(CowClass::LICA));
  fill_box<LabelId>(v, {6, 7, 9}, {10, 11, 68}, map.id(CowClass::LPcom));
  fill_box<LabelId>(v, {4, 4, 69}, {12, 10, 75}, map.id(CowClass::LPCA));
  fill_box<LabelId>(v, {14, 16, 30}, {17, 19, 50}, map.id(CowClass::BA));
  return v;
}

/// The same volume with two x-slices of L-Pcom removed.
inline LabelVolume split_pcom() {
  LabelVolume v = pcom_ground_truth();
  fill_box<LabelId>(v, {6, 7, 38}, {10, 11, 39}, 0);
  return v;
}

/// Schematic complete circle in one axial slab: every textbook junction
/// shares a face. x runs patient right-to-left in image order.
inline LabelVolume complete_cow() {
  const ClassMap map;
  LabelVolume v({16, 60, 60}, {0.6, 0.3525, 0.3525}, 0);
  const auto put = [&](CowClass c, std::ptrdiff_t y0, std::ptrdiff_t y1, std::ptrdiff_t x0,
                       std::ptrdiff_t x1) { fill_box<LabelId>(v, {6, y0, x0}, {9, y1, x1}, map.id(c)); };
  put(CowClass::ThirdA2, 5, 15, 28, 31);
  put(CowClass::Acom, 16, 19, 27, 32);
  put(CowClass::LACA, 16, 19, 18, 26);
  put(CowClass::RACA, 16, 19, 33, 41);
  put(CowClass::LICA, 16, 21, 10, 17);
  put(CowClass::RICA, 16, 21, 42, 49);
  put(CowClass::LMCA, 16, 19, 0, 9);
  put(CowClass::RMCA, 16, 19, 50, 59);
  put(CowClass::LPcom, 22, 37, 12, 15);
  put(CowClass::RPcom, 22, 37, 44, 47);
  put(CowClass::LPCA, 38, 41, 10, 27);
  put(CowClass::RPCA, 38, 41, 32, 49);
  put(CowClass::BA, 38, 55, 28, 31);
  return v;
}

/// Complete circle with the left P1 segment missing: three empty voxels
/// separate L-PCA from BA and it is fed only through L-Pcom.
inline LabelVolume fetal_posterior() {
  LabelVolume v = complete_cow();
  fill_box<LabelId>(v, {6, 38, 25}, {9, 41, 27}, 0);
  return v;
}

}  // namespace phantom
