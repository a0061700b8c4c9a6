#pragma once

// Central finite differences of the class-average loss.

#include <algorithm>
#include <cmath>
#include <random>

#include "cowtopo/cal.hpp"

namespace fd {

using namespace cowtopo;

/// Random label volume with a few solid class blobs and a softmax-like
/// probability volume whose entries lie strictly inside (0.01, 0.99).
inline void random_instance(std::uint32_t seed, Shape shape, LabelVolume& lbl, ProbVolume& prob) {
  std::mt19937 rng(seed);
  lbl = LabelVolume(shape, {0.6, 0.3525, 0.3525}, 0);
  std::uniform_int_distribution<int> cls(1, 13);
  std::uniform_int_distribution<int> pos(0, static_cast<int>(shape.nz) - 2);
  for (int blob = 0; blob < 5; ++blob) {
    const auto id = static_cast<LabelId>(cls(rng));
    const int z0 = pos(rng), y0 = pos(rng), x0 = pos(rng);
    for (int z = z0; z < std::min<int>(z0 + 3, shape.nz); ++z)
      for (int y = y0; y < std::min<int>(y0 + 2, shape.ny); ++y)
        for (int x = x0; x < std::min<int>(x0 + 3, shape.nx); ++x) lbl(z, y, x) = id;
  }
  prob = ProbVolume(shape, lbl.spacing());
  std::normal_distribution<double> logit(0.0, 1.0);
  for (std::size_t i = 0; i < lbl.size(); ++i) {
    double e[kNumChannels];
    double sum = 0;
    for (std::size_t k = 0; k < kNumChannels; ++k) {
      e[k] = std::exp(logit(rng) + (k == lbl[i] ? 2.0 : 0.0));
      sum += e[k];
    }
    for (std::size_t k = 0; k < kNumChannels; ++k)
      prob.channels[k][i] = std::clamp(e[k] / sum, 0.01, 0.99);
  }
}

/// Max relative error of the analytic gradient against central differences
/// of total_loss, over every (class, voxel) entry. Relative error is
/// |a - f| / max(|a|, |f|, 1e-8).
inline double max_relative_error(const ProbVolume& prob, const LabelVolume& lbl, double step,
                                 const CalConfig& cfg = {}) {
  const auto weights = class_weight_maps(lbl, cfg);
  const ProbVolume grad = loss_gradient(prob, lbl, weights, cfg);
  ProbVolume work = prob;
  double worst = 0.0;
  for (CowClass c : kAllCowClasses) {
    auto& ch = work.channel(c);
    for (std::size_t i = 0; i < ch.size(); ++i) {
      const double orig = ch[i];
      ch[i] = orig + step;
      const double up = total_loss(work, lbl, weights, cfg).total;
      ch[i] = orig - step;
      const double down = total_loss(work, lbl, weights, cfg).total;
      ch[i] = orig;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = grad.channel(c)[i];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
      worst = std::max(worst, std::abs(analytic - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace fd
