#include "cowtopo/cal.hpp"

#include <algorithm>
#include <cmath>

#include "cowtopo/topo.hpp"

namespace cowtopo {

namespace {

struct Sums {
  double overlap = 0.0;  // sum p*y
  double pred = 0.0;     // sum p
  double target = 0.0;   // sum y
};

Sums overlap_sums(const Grid<double>& prob, const Mask& target) {
  Sums s;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double p = prob[i];
    const double y = target[i] ? 1.0 : 0.0;
    s.overlap += p * y;
    s.pred += p;
    s.target += y;
  }
  return s;
}

void check_inputs(const Grid<double>& prob, const Mask& target, const Grid<double>& weights) {
  require_same_shape(prob, target, "class_loss");
  require_same_shape(prob, weights, "class_loss");
}

}  // namespace

void CalConfig::validate() const {
  if (std::abs(alpha_t + beta_t - 1.0) > 1e-12)
    throw ValidationError("alpha_t + beta_t must equal 1");
  if (!(alpha_t >= 0.0 && beta_t >= 0.0)) throw ValidationError("alpha_t and beta_t must be >= 0");
  if (!(epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  if (!(lambda_fg > 0.0)) throw ValidationError("lambda_fg must be > 0");
  if (!(prob_floor > 0.0 && prob_floor < 0.5)) throw ValidationError("prob_floor must be in (0, 0.5)");
  if (!(focal_exponent >= 0.0)) throw ValidationError("focal_exponent must be >= 0");
}

double centerline_weight(const CalConfig& cfg) { return -cfg.lambda_fg * std::log(cfg.epsilon); }

double foreground_weight(double dc, double dc_max, const CalConfig& cfg, bool clamp) {
  const double ratio = dc_max > 0.0 ? dc / dc_max : 0.0;
  const double w = -cfg.lambda_fg * std::log(ratio + cfg.epsilon);
  return clamp ? std::max(cfg.weight_floor, w) : w;
}

WeightMap weight_map(const Mask& class_mask, const CalConfig& cfg) {
  cfg.validate();
  WeightMap out;
  out.weights = Grid<double>::like(class_mask, 1.0);
  out.raw = Grid<double>::like(class_mask, 1.0);

  Index3 lo, hi;
  if (!nonzero_bounds(class_mask, lo, hi)) return out;

  // Distances inside the bounding box are exact: both the class voxels and
  // their skeleton lie within it.
  const Mask sub = crop(class_mask, lo, hi);
  const Skeleton sk = skeletonize(sub);
  const DistanceField dc = edt(sk.centerline, class_mask.spacing());

  double dc_max = 0.0;
  for (std::size_t i = 0; i < sub.size(); ++i)
    if (sub[i]) dc_max = std::max(dc_max, dc[i]);
  out.dc_max = dc_max;

  for (std::size_t i = 0; i < sub.size(); ++i) {
    if (!sub[i]) continue;
    const Index3 p = sub.coord(i);
    const std::size_t g = class_mask.index(p.z + lo.z, p.y + lo.y, p.x + lo.x);
    out.raw[g] = foreground_weight(dc[i], dc_max, cfg, false);
    out.weights[g] = std::max(cfg.weight_floor, out.raw[g]);
  }
  return out;
}

WeightMap weight_map(const LabelVolume& lbl, CowClass c, const CalConfig& cfg, const ClassMap& map) {
  return weight_map(one_hot(lbl, c, map), cfg);
}

ClassLoss class_loss(const Grid<double>& prob, const Mask& target, const Grid<double>& weights,
                     const CalConfig& cfg) {
  check_inputs(prob, target, weights);
  const Sums s = overlap_sums(prob, target);
  const double n = static_cast<double>(prob.size());

  ClassLoss l;
  const double dice_den = s.pred + s.target;
  l.dice_term = dice_den > 0.0 ? -2.0 * s.overlap / dice_den : -1.0;
  const double tv_den = cfg.alpha_t * s.pred + cfg.beta_t * s.target;
  l.tversky_term = tv_den > 0.0 ? 1.0 - s.overlap / tv_den : 0.0;

  double focal = 0.0;
  double wce = 0.0;
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double pt = target[i] ? prob[i] : 1.0 - prob[i];
    const double log_pt = std::log(std::max(pt, cfg.prob_floor));
    const double miss = 1.0 - pt;
    if (miss > 0.0) focal += std::pow(miss, cfg.focal_exponent) * log_pt;
    wce += weights[i] * -log_pt;
  }
  l.focal_term = n > 0 ? -focal / n : 0.0;
  l.wce_term = wce;
  l.total = l.dice_term + l.focal_term + l.tversky_term + l.wce_term;
  return l;
}

Grid<double> class_loss_gradient(const Grid<double>& prob, const Mask& target,
                                 const Grid<double>& weights, const CalConfig& cfg,
                                 LossTerms terms) {
  check_inputs(prob, target, weights);
  const Sums s = overlap_sums(prob, target);
  const double n = static_cast<double>(prob.size());
  const double dice_den = s.pred + s.target;
  const double tv_den = cfg.alpha_t * s.pred + cfg.beta_t * s.target;
  const double g = cfg.focal_exponent;

  Grid<double> grad = Grid<double>::like(prob, 0.0);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    const double y = target[i] ? 1.0 : 0.0;
    double d = 0.0;
    if (terms.dice && dice_den > 0.0) d += -2.0 * (y * dice_den - s.overlap) / (dice_den * dice_den);
    if (terms.tversky && tv_den > 0.0) d += -(y * tv_den - cfg.alpha_t * s.overlap) / (tv_den * tv_den);

    // Both log terms are functions of p_t; dp_t/dp = +1 on target, -1 off it.
    const double sign = target[i] ? 1.0 : -1.0;
    const double pt = target[i] ? prob[i] : 1.0 - prob[i];
    const double dlog = pt > cfg.prob_floor ? 1.0 / pt : 0.0;
    const double log_pt = std::log(std::max(pt, cfg.prob_floor));
    const double miss = 1.0 - pt;
    double dfocal_dpt = 0.0;  // d/dp_t of (1 - p_t)^g ln p_t
    if (miss > 0.0) {
      dfocal_dpt = std::pow(miss, g) * dlog;
      if (g != 0.0) dfocal_dpt -= g * std::pow(miss, g - 1.0) * log_pt;
    }
    if (terms.focal) d += -(1.0 / n) * dfocal_dpt * sign;
    if (terms.wce) d += -weights[i] * dlog * sign;
    grad[i] = d;
  }
  return grad;
}

std::vector<WeightMap> class_weight_maps(const LabelVolume& lbl, const CalConfig& cfg,
                                         const ClassMap& map) {
  std::vector<WeightMap> out;
  out.reserve(kNumCowClasses);
  for (CowClass c : kAllCowClasses) out.push_back(weight_map(lbl, c, cfg, map));
  return out;
}

LossBreakdown total_loss(const ProbVolume& prob, const LabelVolume& lbl, const CalConfig& cfg,
                         const ClassMap& map) {
  prob.validate();
  require_same_shape(prob.channels[0], lbl, "total_loss");
  return total_loss(prob, lbl, class_weight_maps(lbl, cfg, map), cfg, map);
}

LossBreakdown total_loss(const ProbVolume& prob, const LabelVolume& lbl,
                         const std::vector<WeightMap>& weights, const CalConfig& cfg,
                         const ClassMap& map) {
  cfg.validate();
  prob.validate();
  require_same_shape(prob.channels[0], lbl, "total_loss");
  if (weights.size() != kNumCowClasses) throw ValidationError("need one weight map per class");

  LossBreakdown out;
  out.num_voxels = lbl.size();
  double sum = 0.0;
  for (CowClass c : kAllCowClasses) {
    const std::size_t k = class_index(c);
    out.per_class[k] = class_loss(prob.channel(c), one_hot(lbl, c, map), weights[k].weights, cfg);
    sum += out.per_class[k].total;
  }
  out.total = sum / static_cast<double>(kNumCowClasses);
  return out;
}

ProbVolume loss_gradient(const ProbVolume& prob, const LabelVolume& lbl, const CalConfig& cfg,
                         const ClassMap& map) {
  prob.validate();
  require_same_shape(prob.channels[0], lbl, "loss_gradient");
  return loss_gradient(prob, lbl, class_weight_maps(lbl, cfg, map), cfg, map);
}

ProbVolume loss_gradient(const ProbVolume& prob, const LabelVolume& lbl,
                         const std::vector<WeightMap>& weights, const CalConfig& cfg,
                         const ClassMap& map) {
  cfg.validate();
  prob.validate();
  require_same_shape(prob.channels[0], lbl, "loss_gradient");
  if (weights.size() != kNumCowClasses) throw ValidationError("need one weight map per class");

  ProbVolume grad(lbl.shape(), lbl.spacing());
  const double scale = 1.0 / static_cast<double>(kNumCowClasses);
  for (CowClass c : kAllCowClasses) {
    Grid<double> g = class_loss_gradient(prob.channel(c), one_hot(lbl, c, map),
                                         weights[class_index(c)].weights, cfg);
    for (double& v : g.storage()) v *= scale;
    grad.channel(c) = std::move(g);
  }
  return grad;
}

}  // namespace cowtopo
