#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cowtopo/cow_tasks.hpp"
#include "cowtopo/topo.hpp"
#include "cowtopo/volume.hpp"

namespace cowtopo {

/// 2|P & G| / (|P| + |G|); 1 when both are empty.
double dice(const Mask& pred, const Mask& gt);

struct ClDiceParts {
  double topology_precision = 0.0;   // |skel(P) & G| / |skel(P)|
  double topology_sensitivity = 0.0; // |skel(G) & P| / |skel(G)|
  double value = 0.0;
};

/// Harmonic mean of topology precision and sensitivity. Both empty -> 1;
/// one side empty -> 0.
ClDiceParts cl_dice_parts(const Mask& pred, const Mask& gt);
double cl_dice(const Mask& pred, const Mask& gt);

/// |#components(pred) - #components(gt)|.
std::size_t b0_error(const Mask& pred, const Mask& gt, Connectivity conn = Connectivity::TwentySix);

/// Diagonal of the grid extent in mm, the default hd95 penalty.
double volume_diagonal_mm(const Shape& shape, const Spacing& spacing);

struct Hd95 {
  double mm = 0.0;
  /// Exactly one mask was empty; `mm` then holds the penalty.
  bool undefined = false;
};

/// 95th percentile (linear interpolation) of the symmetric surface-distance
/// multiset. Surface voxels have a 6-neighbour outside the mask; outside the
/// grid counts as outside. Both empty -> 0.
Hd95 hd95(const Mask& pred, const Mask& gt, std::optional<double> empty_penalty_mm = std::nullopt);

/// Mean per-category recall over the categories present in `actuals`.
double balanced_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& actuals);

enum class ClassesMode { PresentInGt, All13 };

ClassesMode parse_classes_mode(std::string_view s);
std::string_view classes_mode_name(ClassesMode m);

struct EvalConfig {
  ClassesMode classes_mode = ClassesMode::PresentInGt;
  Connectivity connectivity = Connectivity::TwentySix;
  std::optional<double> hd95_penalty_mm;
  GraphDeriveConfig graph;
};

struct ClassMetrics {
  CowClass cls = CowClass::BA;
  bool in_gt = false;
  bool in_pred = false;
  double dice = 1.0;
  Hd95 hd95;
  std::size_t b0_error = 0;
};

struct CaseMetrics {
  std::array<ClassMetrics, kNumCowClasses> per_class{};
  /// Classes entering the averages.
  std::vector<CowClass> averaged;
  double avg_dice = 1.0;
  double avg_hd95 = 0.0;
  double avg_b0 = 0.0;
  ClDiceParts cl_dice;
  CowGraph graph_pred;
  CowGraph graph_gt;
};

/// Per-class metrics over all 13 classes plus the averages. In PresentInGt
/// mode a case whose ground truth has no foreground averages over all 13.
CaseMetrics evaluate_case(const LabelVolume& pred, const LabelVolume& gt, const EvalConfig& cfg = {},
                          const ClassMap& map = {});

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single case
};

MeanSd mean_sd(const std::vector<double>& v);

struct CohortSummary {
  std::size_t cases = 0;
  MeanSd dice;
  MeanSd hd95;
  MeanSd b0;
  MeanSd cl_dice;
  /// Per-class means over cases where the class was averaged.
  std::array<std::optional<double>, kNumCowClasses> class_dice{};
  /// Variant categories are the 4-bit edge strings, e.g. "1101".
  double anterior_balanced_accuracy = 0.0;
  double posterior_balanced_accuracy = 0.0;
};

CohortSummary summarize(const std::vector<CaseMetrics>& cases);

std::string bits_string(const std::array<int, 4>& bits);

}  // namespace cowtopo
