#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "cowtopo/cal.hpp"
#include "cowtopo/cow_tasks.hpp"
#include "cowtopo/metrics.hpp"
#include "cowtopo/preprocess.hpp"
#include "cowtopo/refine.hpp"

namespace cowtopo {

/// Every tunable in one place. Missing keys keep their defaults; unknown keys
/// are rejected so a typo cannot silently fall back to a default.
///
/// {
///   "class_map": "ids.json",
///   "preprocess": {"cta_window": [-1000, 1800], "mra_window": [0, 700],
///                  "target_spacing": [0.6, 0.3525, 0.3525], "intensity_order": 1},
///   "cal": {"alpha_t": 0.2, "beta_t": 0.8, "lambda_fg": 20, "epsilon": 0.01,
///           "focal_exponent": 2, "prob_floor": 1e-7, "weight_floor": 0},
///   "refine": {"t_com": 20, "t_dis": 10, "t_dis_unit": "voxel",
///              "classes": ["Acom", "R-Pcom", "L-Pcom"], "bridge_dilation_radius": 1,
///              "connectivity": 26, "bridge_shape": "straight", "spline_tail": 5},
///   "graph": {"presence_min_voxels": 20, "adjacency_radius_mm": 1.0},
///   "metrics": {"classes_mode": "present", "connectivity": 26, "hd95_penalty_mm": null,
///               "boundary_d": 2}
/// }
struct RunConfig {
  PreprocessConfig preprocess;
  CalConfig cal;
  RefineConfig refine;
  GraphDeriveConfig graph;
  EvalConfig metrics;
  int boundary_d = 2;
  /// Resolved relative to the config file.
  std::optional<std::filesystem::path> class_map_path;

  void validate() const;
  ClassMap class_map() const;

  static RunConfig from_json_text(std::string_view text,
                                  const std::filesystem::path& base_dir = {});
  static RunConfig from_json_file(const std::filesystem::path& path);
  /// Canonical JSON form with every field spelled out.
  std::string to_json_text() const;
};

DistanceUnit parse_distance_unit(std::string_view s);
std::string_view distance_unit_name(DistanceUnit u);
BridgeShape parse_bridge_shape(std::string_view s);
std::string_view bridge_shape_name(BridgeShape b);

/// Comma-separated class names, e.g. "Acom,R-Pcom,L-Pcom".
std::vector<CowClass> parse_class_list(std::string_view s);

}  // namespace cowtopo
