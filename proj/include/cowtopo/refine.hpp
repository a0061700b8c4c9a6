#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "cowtopo/topo.hpp"
#include "cowtopo/volume.hpp"

namespace cowtopo {

enum class DistanceUnit { Voxel, Millimeter };

enum class BridgeShape {
  /// Straight 3D segment between the two endpoints.
  Straight,
  /// Catmull-Rom curve that also follows the last few skeleton voxels on each side.
  Spline,
};

struct RefineConfig {
  /// Minimum voxel count of a meaningful component.
  int t_com = 20;
  /// Maximum endpoint gap that is repaired.
  double t_dis = 10.0;
  DistanceUnit t_dis_unit = DistanceUnit::Voxel;
  std::vector<CowClass> classes_to_refine{CowClass::Acom, CowClass::RPcom, CowClass::LPcom};
  int bridge_dilation_radius = 1;
  Connectivity connectivity = Connectivity::TwentySix;
  BridgeShape bridge_shape = BridgeShape::Straight;
  /// Skeleton voxels walked back from each endpoint to place spline controls.
  int spline_tail = 5;

  void validate() const;
};

enum class RefineAction {
  Unchanged,
  Bridged,
  KeptLargest,
  Zeroed,
  ReducedThenBridged,
  ReducedThenKeptLargest,
  ReducedThenZeroed,
};

std::string_view action_name(RefineAction a);

struct ClassRefineReport {
  std::optional<CowClass> cls;
  RefineAction action = RefineAction::Unchanged;
  std::size_t components_before = 0;
  std::size_t components_after = 0;
  std::size_t voxels_added = 0;
  std::size_t voxels_removed = 0;
  /// Gap between the paired endpoints, in the configured unit, when both
  /// kept components were meaningful.
  std::optional<double> endpoint_distance;
  std::optional<Index3> endpoint_a;
  std::optional<Index3> endpoint_b;
};

struct RefineReport {
  std::vector<ClassRefineReport> classes;
};

struct ClassRefineResult {
  Mask mask;
  ClassRefineReport report;
};

/// Closest pair of skeleton endpoints between two components, one from each.
/// Falls back to every skeleton voxel of a component that has no endpoint.
struct EndpointPair {
  Index3 a;
  Index3 b;
  double distance = 0.0;
};
EndpointPair closest_endpoints(const Mask& first, const Mask& second, DistanceUnit unit);

/// Voxels of a 26-connected digital segment from a to b, both included.
std::vector<Index3> rasterize_segment(const Index3& a, const Index3& b);

/// Repair/cleanup of one class mask:
///   0 or 1 component            -> unchanged
///   2 components, both >= t_com -> bridge if the endpoint gap <= t_dis, else keep the larger
///   2 components, neither       -> zeroed
///   2 components, one           -> keep the larger
///   more than 2                 -> keep the two largest, then the rules above
/// Bridge voxels that fall on `blocked` are skipped; if the bridge then fails
/// to join the pieces the result degrades to keeping the larger component.
ClassRefineResult refine_class(const Mask& mask, const RefineConfig& cfg = {},
                               const Mask* blocked = nullptr);

/// Applies refine_class to each configured class in enumeration order.
/// Other classes are untouched and bridges only claim background voxels.
std::pair<LabelVolume, RefineReport> refine_volume(const LabelVolume& lbl,
                                                   const RefineConfig& cfg = {},
                                                   const ClassMap& map = {});

}  // namespace cowtopo
