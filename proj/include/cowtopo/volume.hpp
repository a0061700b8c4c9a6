#pragma once

#include <vector>

#include "cowtopo/cow_class.hpp"
#include "cowtopo/grid.hpp"

namespace cowtopo {

/// Scalar intensity image.
using Volume = Grid<float>;

/// Grid of class ids; every value is 0 or an id from the active ClassMap.
using LabelVolume = Grid<LabelId>;

/// Per-class probabilities. Channel 0 is background, channel k+1 is the
/// class with enumeration index k.
struct ProbVolume {
  std::vector<Grid<double>> channels;

  ProbVolume() = default;
  ProbVolume(Shape shape, Spacing spacing);

  const Shape& shape() const { return channels.front().shape(); }
  const Spacing& spacing() const { return channels.front().spacing(); }
  Grid<double>& channel(CowClass c) { return channels[class_index(c) + 1]; }
  const Grid<double>& channel(CowClass c) const { return channels[class_index(c) + 1]; }
  Grid<double>& background() { return channels[0]; }

  /// Channel count must be 14 and every channel must share one shape.
  void validate() const;
};

/// Throws ValidationError("invalid class id N") on the first id outside the map.
void validate_labels(const LabelVolume& lbl, const ClassMap& map);

/// y^c: 1 where the label equals class c.
Mask one_hot(const LabelVolume& lbl, CowClass c, const ClassMap& map = {});

/// Union of all foreground classes.
Mask foreground(const LabelVolume& lbl);

/// Perfect one-hot probabilities for a label volume (1 on the true channel, 0 elsewhere).
ProbVolume one_hot_probabilities(const LabelVolume& lbl, const ClassMap& map = {});

}  // namespace cowtopo
