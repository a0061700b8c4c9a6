#pragma once

#include <cstdint>
#include <vector>

#include "cowtopo/grid.hpp"

namespace cowtopo {

enum class Connectivity : int { Six = 6, Eighteen = 18, TwentySix = 26 };

/// Throws ValidationError for anything but 6, 18, 26.
Connectivity connectivity_from_int(int n);

/// Neighbour offsets of the given regime (center excluded), in raster order.
std::vector<Index3> neighbor_offsets(Connectivity conn);

/// Connected-component decomposition. Ids are dense 1..count(), ordered by
/// descending size; equal sizes are ordered by their smallest linear index.
struct ComponentSet {
  Grid<std::uint32_t> labels;
  /// sizes[k] is the voxel count of component id k + 1.
  std::vector<std::size_t> sizes;

  std::size_t count() const { return sizes.size(); }
  /// Binary mask of component `id` (1-based).
  Mask component(std::uint32_t id) const;
  /// Union of components 1..k.
  Mask largest(std::size_t k) const;
};

ComponentSet connected_components(const Mask& mask, Connectivity conn = Connectivity::TwentySix);

/// Count only; cheaper than building the full set when ids are not needed.
std::size_t count_components(const Mask& mask, Connectivity conn = Connectivity::TwentySix);

/// Largest component; empty in, empty out.
Mask largest_component(const Mask& mask, Connectivity conn = Connectivity::TwentySix);

/// Per-voxel distance field in millimetres.
using DistanceField = Grid<double>;

/// Exact squared Euclidean distance (mm^2) from every voxel to the nearest
/// nonzero voxel of `reference`, using separable lower envelopes of parabolas.
DistanceField edt_squared(const Mask& reference, const Spacing& spacing);

/// Exact Euclidean distance (mm). Throws ValidationError("empty reference set").
DistanceField edt(const Mask& reference, const Spacing& spacing);

struct Skeleton {
  Mask centerline;
  /// Skeleton voxels with at most one 26-neighbour on the skeleton, raster order.
  std::vector<Index3> endpoints;
};

/// Topology-preserving 3D thinning with six directional sub-iterations in
/// fixed order (x-, x+, y+, y-, z+, z-). Deletes border voxels that are
/// simple for (26, 6) adjacency and are not line ends.
Skeleton skeletonize(const Mask& mask);

/// Voxels of `skeleton` with 0 or 1 skeleton neighbours under 26-adjacency.
std::vector<Index3> skeleton_endpoints(const Mask& skeleton);

/// Dilation with the discrete Euclidean ball { d : |d|^2 <= r^2 } in voxel units.
Mask dilate(const Mask& mask, int radius_vox);

/// True if p is a simple point of `mask` (26-adjacent foreground, 6-adjacent background).
bool is_simple_point(const Mask& mask, const Index3& p);

}  // namespace cowtopo
