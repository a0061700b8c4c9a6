#include "cowtopo/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace cowtopo {

namespace {

bool on_surface(const Mask& m, std::size_t i) {
  const Index3 p = m.coord(i);
  static const Index3 face[6] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
  for (const Index3& o : face) {
    const Index3 q{p.z + o.z, p.y + o.y, p.x + o.x};
    if (!m.contains(q) || !m.at(q)) return true;
  }
  return false;
}

Mask surface_of(const Mask& m) {
  Mask s = Mask::like(m, 0);
  for (std::size_t i = 0; i < m.size(); ++i)
    if (m[i] && on_surface(m, i)) s[i] = 1;
  return s;
}

// Linear interpolation between order statistics at rank (n - 1) q.
double percentile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

double dice(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt, "dice");
  std::size_t inter = 0, np = 0, ng = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    inter += p && g;
    np += p;
    ng += g;
  }
  if (np + ng == 0) return 1.0;
  return 2.0 * static_cast<double>(inter) / static_cast<double>(np + ng);
}

ClDiceParts cl_dice_parts(const Mask& pred, const Mask& gt) {
  require_same_shape(pred, gt, "cl_dice");
  ClDiceParts out;
  const std::size_t np = count_nonzero(pred), ng = count_nonzero(gt);
  if (np == 0 && ng == 0) return {1.0, 1.0, 1.0};
  if (np == 0 || ng == 0) return out;
  const Mask sp = skeletonize(pred).centerline;
  const Mask sg = skeletonize(gt).centerline;
  std::size_t sp_n = 0, sp_in = 0, sg_n = 0, sg_in = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (sp[i]) {
      ++sp_n;
      sp_in += gt[i] != 0;
    }
    if (sg[i]) {
      ++sg_n;
      sg_in += pred[i] != 0;
    }
  }
  out.topology_precision = static_cast<double>(sp_in) / static_cast<double>(sp_n);
  out.topology_sensitivity = static_cast<double>(sg_in) / static_cast<double>(sg_n);
  const double s = out.topology_precision + out.topology_sensitivity;
  out.value = s > 0 ? 2.0 * out.topology_precision * out.topology_sensitivity / s : 0.0;
  return out;
}

double cl_dice(const Mask& pred, const Mask& gt) { return cl_dice_parts(pred, gt).value; }

std::size_t b0_error(const Mask& pred, const Mask& gt, Connectivity conn) {
  require_same_shape(pred, gt, "b0_error");
  const std::size_t a = count_components(pred, conn), b = count_components(gt, conn);
  return a > b ? a - b : b - a;
}

double volume_diagonal_mm(const Shape& s, const Spacing& sp) {
  const double z = static_cast<double>(s.nz) * sp.dz;
  const double y = static_cast<double>(s.ny) * sp.dy;
  const double x = static_cast<double>(s.nx) * sp.dx;
  return std::sqrt(z * z + y * y + x * x);
}

Hd95 hd95(const Mask& pred, const Mask& gt, std::optional<double> empty_penalty_mm) {
  require_same_shape(pred, gt, "hd95");
  Index3 plo, phi, glo, ghi;
  const bool hp = nonzero_bounds(pred, plo, phi);
  const bool hg = nonzero_bounds(gt, glo, ghi);
  if (!hp && !hg) return {};
  if (!hp || !hg)
    return {empty_penalty_mm.value_or(volume_diagonal_mm(gt.shape(), gt.spacing())), true};

  // Work on the union box padded by one so grid-border voxels stay surface voxels.
  const Index3 lo{std::min(plo.z, glo.z), std::min(plo.y, glo.y), std::min(plo.x, glo.x)};
  const Index3 hi{std::max(phi.z, ghi.z), std::max(phi.y, ghi.y), std::max(phi.x, ghi.x)};
  const Mask sp = surface_of(crop(pred, lo, hi, 1));
  const Mask sg = surface_of(crop(gt, lo, hi, 1));
  const DistanceField to_g = edt(sg, gt.spacing());
  const DistanceField to_p = edt(sp, pred.spacing());
  std::vector<double> d;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (sp[i]) d.push_back(to_g[i]);
    if (sg[i]) d.push_back(to_p[i]);
  }
  return {percentile(std::move(d), 0.95), false};
}

double balanced_accuracy(const std::vector<std::string>& preds, const std::vector<std::string>& actuals) {
  if (preds.empty() || actuals.empty()) throw ValidationError("balanced_accuracy: empty input");
  if (preds.size() != actuals.size()) throw ValidationError("balanced_accuracy: length mismatch");
  std::map<std::string, std::pair<std::size_t, std::size_t>> hits;  // category -> (correct, total)
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    auto& h = hits[actuals[i]];
    ++h.second;
    h.first += preds[i] == actuals[i];
  }
  double sum = 0;
  for (const auto& [k, h] : hits) sum += static_cast<double>(h.first) / static_cast<double>(h.second);
  return sum / static_cast<double>(hits.size());
}

ClassesMode parse_classes_mode(std::string_view s) {
  std::string low(s);
  for (char& c : low) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (low == "present") return ClassesMode::PresentInGt;
  if (low == "all13") return ClassesMode::All13;
  throw ValidationError("unknown classes mode '" + std::string(s) + "' (expected present or all13)");
}

std::string_view classes_mode_name(ClassesMode m) {
  return m == ClassesMode::All13 ? "all13" : "present";
}

CaseMetrics evaluate_case(const LabelVolume& pred, const LabelVolume& gt, const EvalConfig& cfg,
                          const ClassMap& map) {
  require_same_shape(pred, gt, "evaluate_case");
  validate_labels(pred, map);
  validate_labels(gt, map);
  const double penalty = cfg.hd95_penalty_mm.value_or(volume_diagonal_mm(gt.shape(), gt.spacing()));

  CaseMetrics out;
  for (CowClass c : kAllCowClasses) {
    const Mask p = one_hot(pred, c, map);
    const Mask g = one_hot(gt, c, map);
    ClassMetrics& m = out.per_class[class_index(c)];
    m.cls = c;
    m.in_gt = count_nonzero(g) > 0;
    m.in_pred = count_nonzero(p) > 0;
    m.dice = dice(p, g);
    m.hd95 = hd95(p, g, penalty);
    m.b0_error = b0_error(p, g, cfg.connectivity);
  }

  for (const auto& m : out.per_class)
    if (cfg.classes_mode == ClassesMode::All13 || m.in_gt) out.averaged.push_back(m.cls);
  if (out.averaged.empty()) out.averaged.assign(kAllCowClasses.begin(), kAllCowClasses.end());

  std::vector<double> d, h, b;
  for (CowClass c : out.averaged) {
    const auto& m = out.per_class[class_index(c)];
    d.push_back(m.dice);
    h.push_back(m.hd95.mm);
    b.push_back(static_cast<double>(m.b0_error));
  }
  out.avg_dice = mean(d);
  out.avg_hd95 = mean(h);
  out.avg_b0 = mean(b);
  out.cl_dice = cl_dice_parts(foreground(pred), foreground(gt));
  out.graph_pred = derive_graph(pred, cfg.graph, map);
  out.graph_gt = derive_graph(gt, cfg.graph, map);
  return out;
}

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd r;
  if (v.empty()) return r;
  r.mean = mean(v);
  if (v.size() > 1) {
    double ss = 0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

std::string bits_string(const std::array<int, 4>& bits) {
  std::string s;
  for (int b : bits) s += b ? '1' : '0';
  return s;
}

CohortSummary summarize(const std::vector<CaseMetrics>& cases) {
  CohortSummary s;
  s.cases = cases.size();
  if (cases.empty()) return s;
  std::vector<double> d, h, b, cl;
  std::vector<std::string> ap, aa, pp, pa;
  std::array<std::vector<double>, kNumCowClasses> per;
  for (const auto& c : cases) {
    d.push_back(c.avg_dice);
    h.push_back(c.avg_hd95);
    b.push_back(c.avg_b0);
    cl.push_back(c.cl_dice.value);
    for (CowClass k : c.averaged) per[class_index(k)].push_back(c.per_class[class_index(k)].dice);
    ap.push_back(bits_string(c.graph_pred.anterior));
    aa.push_back(bits_string(c.graph_gt.anterior));
    pp.push_back(bits_string(c.graph_pred.posterior));
    pa.push_back(bits_string(c.graph_gt.posterior));
  }
  s.dice = mean_sd(d);
  s.hd95 = mean_sd(h);
  s.b0 = mean_sd(b);
  s.cl_dice = mean_sd(cl);
  for (std::size_t k = 0; k < kNumCowClasses; ++k)
    if (!per[k].empty()) s.class_dice[k] = mean(per[k]);
  s.anterior_balanced_accuracy = balanced_accuracy(ap, aa);
  s.posterior_balanced_accuracy = balanced_accuracy(pp, pa);
  return s;
}

}  // namespace cowtopo
