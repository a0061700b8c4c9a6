#pragma once

#include <filesystem>

#include "cowtopo/volume.hpp"

namespace cowtopo {

// Supported formats, chosen by extension:
//   .nii / .nii.gz   NIfTI-1 single file. dim[1..3] = (nx, ny, nz), so the
//                    native NIfTI voxel order is already z-major here.
//   .json / .bin     fixture pair: <name>.json holds
//                    {"shape":[nz,ny,nx],"spacing":[dz,dy,dx],"dtype":"...","channels":1}
//                    and <name>.bin the little-endian flat array.

/// Intensity image. Applies scl_slope/scl_inter. Rejects NaN/Inf.
Volume load_volume(const std::filesystem::path& path);

/// Label image. Rejects non-integer values and ids outside `map`.
LabelVolume load_labels(const std::filesystem::path& path, const ClassMap& map = {});

/// Any nonzero voxel is foreground.
Mask load_mask(const std::filesystem::path& path);

/// 4D image with 14 channels (background first).
ProbVolume load_probabilities(const std::filesystem::path& path);

void save_volume(const Volume& v, const std::filesystem::path& path);
void save_labels(const LabelVolume& v, const std::filesystem::path& path);
void save_mask(const Mask& m, const std::filesystem::path& path);
/// Stored as float64.
void save_grid(const Grid<double>& g, const std::filesystem::path& path);
void save_probabilities(const ProbVolume& p, const std::filesystem::path& path);

}  // namespace cowtopo
