#include "cowtopo/volume.hpp"

namespace cowtopo {

ProbVolume::ProbVolume(Shape shape, Spacing spacing) {
  channels.reserve(kNumChannels);
  for (std::size_t k = 0; k < kNumChannels; ++k) channels.emplace_back(shape, spacing, 0.0);
}

void ProbVolume::validate() const {
  if (channels.size() != kNumChannels)
    throw ValidationError("probability volume needs " + std::to_string(kNumChannels) +
                          " channels, got " + std::to_string(channels.size()));
  for (const auto& ch : channels)
    if (ch.shape() != channels.front().shape())
      throw ValidationError("probability channels differ in shape");
}

void validate_labels(const LabelVolume& lbl, const ClassMap& map) {
  for (LabelId v : lbl.data())
    if (!map.is_valid_label(v)) throw ValidationError("invalid class id " + std::to_string(v));
}

Mask one_hot(const LabelVolume& lbl, CowClass c, const ClassMap& map) {
  const LabelId id = map.id(c);
  Mask m = Mask::like(lbl);
  for (std::size_t i = 0; i < lbl.size(); ++i) m[i] = lbl[i] == id ? 1 : 0;
  return m;
}

Mask foreground(const LabelVolume& lbl) {
  Mask m = Mask::like(lbl);
  for (std::size_t i = 0; i < lbl.size(); ++i) m[i] = lbl[i] != 0 ? 1 : 0;
  return m;
}

ProbVolume one_hot_probabilities(const LabelVolume& lbl, const ClassMap& map) {
  ProbVolume p(lbl.shape(), lbl.spacing());
  for (std::size_t i = 0; i < lbl.size(); ++i) {
    if (lbl[i] == 0) {
      p.channels[0][i] = 1.0;
      continue;
    }
    const auto c = map.class_of(lbl[i]);
    if (!c) throw ValidationError("invalid class id " + std::to_string(lbl[i]));
    p.channel(*c)[i] = 1.0;
  }
  return p;
}

}  // namespace cowtopo
