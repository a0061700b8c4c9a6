#pragma once

#include <array>
#include <string>

#include "cowtopo/topo.hpp"
#include "cowtopo/volume.hpp"

namespace cowtopo {

/// Axis-aligned box with inclusive voxel corners (z, y, x).
struct BoundingBox3D {
  Index3 min;
  Index3 max;

  bool valid() const { return min.z <= max.z && min.y <= max.y && min.x <= max.x; }
  std::size_t volume() const;
  friend bool operator==(const BoundingBox3D&, const BoundingBox3D&) = default;
};

/// Tight box of the largest component. Throws ValidationError("no RoI predicted").
BoundingBox3D roi_box_from_mask(const Mask& roi, Connectivity conn = Connectivity::TwentySix);

/// World position (x, y, z order, mm) of a voxel centre: sform when present,
/// otherwise plain spacing scaling.
std::array<double, 3> voxel_to_world(const Index3& p, const Spacing& spacing, const WorldMeta& world);

double box_iou(const BoundingBox3D& a, const BoundingBox3D& b);

/// IoU of the two boundary shells, a shell being the voxels of a box that
/// lie fewer than `d` voxels from one of its faces.
double box_boundary_iou(const BoundingBox3D& a, const BoundingBox3D& b, int d = 2);

enum class GraphEdge { LA1, Acom, ThirdA2, RA1, LPcom, LP1, RP1, RPcom };

std::string_view edge_name(GraphEdge e);

/// Edge presence bits in left-to-right order:
///   anterior  = L-A1, Acom, 3rd-A2, R-A1
///   posterior = L-Pcom, L-P1, R-P1, R-Pcom
struct CowGraph {
  std::array<int, 4> anterior{};
  std::array<int, 4> posterior{};

  int& bit(GraphEdge e);
  int bit(GraphEdge e) const;
  friend bool operator==(const CowGraph&, const CowGraph&) = default;
};

struct GraphDeriveConfig {
  int presence_min_voxels = 20;
  double adjacency_radius_mm = 1.0;

  void validate() const;
};

/// True when some voxel of `a` is within `radius_mm` (centre to centre) of a voxel of `b`.
bool classes_within(const Mask& a, const Mask& b, double radius_mm);

CowGraph derive_graph(const LabelVolume& lbl, const GraphDeriveConfig& cfg = {},
                      const ClassMap& map = {});

}  // namespace cowtopo
