#pragma once

#include <array>
#include <vector>

#include "cowtopo/volume.hpp"

namespace cowtopo {

/// Connectivity-aware loss parameters.
struct CalConfig {
  double alpha_t = 0.2;  // false-positive weight of the Tversky term
  double beta_t = 0.8;   // false-negative weight
  double lambda_fg = 20.0;
  double epsilon = 0.01;
  double focal_exponent = 2.0;
  /// Arguments of every logarithm are floored at this value.
  double prob_floor = 1e-7;
  /// Lower clamp for foreground weights; the raw log weight dips below zero
  /// near the class boundary.
  double weight_floor = 0.0;

  void validate() const;
};

/// Distance-to-centerline weights for one class. Background voxels are 1.
struct WeightMap {
  Grid<double> weights;
  /// Same as `weights` without the `weight_floor` clamp.
  Grid<double> raw;
  /// Largest centerline distance (mm) over the class voxels; 0 for an empty
  /// class or a class that is its own skeleton.
  double dc_max = 0.0;
};

/// -lambda_fg * ln(epsilon): the weight of a centerline voxel.
double centerline_weight(const CalConfig& cfg);

/// Weight for one foreground voxel at centerline distance `dc`.
double foreground_weight(double dc, double dc_max, const CalConfig& cfg, bool clamp = true);

/// Weights for a binary class mask, with distances measured in mm using the
/// mask's spacing. The whole grid is treated as one patch.
WeightMap weight_map(const Mask& class_mask, const CalConfig& cfg = {});
WeightMap weight_map(const LabelVolume& lbl, CowClass c, const CalConfig& cfg = {},
                     const ClassMap& map = {});

/// The four per-class terms and their sum L_c.
struct ClassLoss {
  double dice_term = 0.0;
  double focal_term = 0.0;
  double tversky_term = 0.0;
  double wce_term = 0.0;
  double total = 0.0;
};

struct LossBreakdown {
  std::array<ClassLoss, kNumCowClasses> per_class{};
  /// Mean of per_class[].total.
  double total = 0.0;
  std::size_t num_classes = kNumCowClasses;
  std::size_t num_voxels = 0;
};

/// Per-class objective:
///   dice    = -2 sum(p y) / sum(p + y)            (-1 when the denominator is 0)
///   focal   = -(1/N) sum (1 - p_t)^g ln p_t,  p_t = p if y else 1 - p
///   tversky = 1 - sum(p y) / (a sum p + b sum y)  (0 when the denominator is 0)
///   wce     = sum w_i CE(p_i, y_i)
ClassLoss class_loss(const Grid<double>& prob, const Mask& target, const Grid<double>& weights,
                     const CalConfig& cfg = {});

/// Selects which terms enter a gradient.
struct LossTerms {
  bool dice = true;
  bool focal = true;
  bool tversky = true;
  bool wce = true;
};

/// d L_c / d p_i for every voxel, restricted to the selected terms.
Grid<double> class_loss_gradient(const Grid<double>& prob, const Mask& target,
                                 const Grid<double>& weights, const CalConfig& cfg = {},
                                 LossTerms terms = {});

/// Weight maps for all 13 classes, in enumeration order.
std::vector<WeightMap> class_weight_maps(const LabelVolume& lbl, const CalConfig& cfg = {},
                                         const ClassMap& map = {});

/// Class-average loss over all 13 classes with weight maps computed from `lbl`.
LossBreakdown total_loss(const ProbVolume& prob, const LabelVolume& lbl, const CalConfig& cfg = {},
                         const ClassMap& map = {});
/// Same, with precomputed weight maps (one per class, enumeration order).
LossBreakdown total_loss(const ProbVolume& prob, const LabelVolume& lbl,
                         const std::vector<WeightMap>& weights, const CalConfig& cfg = {},
                         const ClassMap& map = {});

/// Gradient of the class-average loss w.r.t. every probability channel. The
/// background channel does not enter the loss and its gradient is zero.
ProbVolume loss_gradient(const ProbVolume& prob, const LabelVolume& lbl, const CalConfig& cfg = {},
                         const ClassMap& map = {});
ProbVolume loss_gradient(const ProbVolume& prob, const LabelVolume& lbl,
                         const std::vector<WeightMap>& weights, const CalConfig& cfg = {},
                         const ClassMap& map = {});

}  // namespace cowtopo
