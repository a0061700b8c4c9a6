#pragma once

#include <string_view>

#include "cowtopo/volume.hpp"

namespace cowtopo {

enum class Modality { CTA, MRA };

Modality parse_modality(std::string_view s);
std::string_view modality_name(Modality m);

struct IntensityWindow {
  double low;
  double high;
};

struct PreprocessConfig {
  IntensityWindow cta_window{-1000.0, 1800.0};
  IntensityWindow mra_window{0.0, 700.0};
  Spacing target_spacing{0.6, 0.3525, 0.3525};
  /// 0 = nearest, 1 = trilinear.
  int intensity_order = 1;
  /// Labels only support nearest neighbour.
  int label_order = 0;

  const IntensityWindow& window(Modality m) const {
    return m == Modality::CTA ? cta_window : mra_window;
  }
  void validate() const;
};

/// Clamp into the modality window.
Volume truncate(const Volume& v, Modality m, const PreprocessConfig& cfg = {});

/// Output shape per axis is round(n * spacing / target), at least 1. Voxel
/// centres are aligned so that an unchanged spacing maps every voxel to itself.
Volume resample(const Volume& v, const PreprocessConfig& cfg = {});
LabelVolume resample(const LabelVolume& v, const PreprocessConfig& cfg = {});

/// Per-case min-max rescale to [0, 1]; constant images become all zeros.
Volume normalize(const Volume& v);

/// truncate -> resample -> normalize.
Volume preprocess_case(const Volume& v, Modality m, const PreprocessConfig& cfg = {});

}  // namespace cowtopo
