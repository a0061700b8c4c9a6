#include "cowtopo/refine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>

namespace cowtopo {

namespace {

struct ComponentSkeleton {
  std::vector<Index3> candidates;  // global coords
  Mask centerline;                 // local to the padded crop
  Index3 origin;                   // global coord of local (0,0,0)
};

ComponentSkeleton component_skeleton(const Mask& comp) {
  ComponentSkeleton out;
  Index3 lo, hi;
  if (!nonzero_bounds(comp, lo, hi)) return out;
  const Mask sub = crop(comp, lo, hi, 1);
  Skeleton sk = skeletonize(sub);
  out.origin = {lo.z - 1, lo.y - 1, lo.x - 1};
  std::vector<Index3> local = sk.endpoints;
  if (local.empty())
    for (std::size_t i = 0; i < sk.centerline.size(); ++i)
      if (sk.centerline[i]) local.push_back(sk.centerline.coord(i));
  for (const Index3& p : local)
    out.candidates.push_back({p.z + out.origin.z, p.y + out.origin.y, p.x + out.origin.x});
  out.centerline = std::move(sk.centerline);
  return out;
}

double gap(const Index3& a, const Index3& b, const Spacing& s, DistanceUnit unit) {
  double dz = static_cast<double>(a.z - b.z);
  double dy = static_cast<double>(a.y - b.y);
  double dx = static_cast<double>(a.x - b.x);
  if (unit == DistanceUnit::Millimeter) {
    dz *= s.dz;
    dy *= s.dy;
    dx *= s.dx;
  }
  return std::sqrt(dz * dz + dy * dy + dx * dx);
}

EndpointPair closest_pair(const std::vector<Index3>& a, const std::vector<Index3>& b,
                          const Spacing& s, DistanceUnit unit) {
  EndpointPair best;
  best.distance = std::numeric_limits<double>::infinity();
  for (const Index3& p : a)
    for (const Index3& q : b) {
      const double d = gap(p, q, s, unit);
      if (d < best.distance) best = {p, q, d};
    }
  return best;
}

// Skeleton voxel `steps` hops from `start` (or the farthest reachable one
// short of that), walking the skeleton under 26-adjacency.
Index3 walk_back(const ComponentSkeleton& cs, const Index3& start, int steps) {
  const Mask& sk = cs.centerline;
  const Index3 s{start.z - cs.origin.z, start.y - cs.origin.y, start.x - cs.origin.x};
  if (!sk.contains(s) || !sk.at(s) || steps <= 0) return start;
  Grid<int> depth = Grid<int>::like(sk, -1);
  std::deque<Index3> q{s};
  depth.at(s) = 0;
  Index3 last = s;
  const auto offs = neighbor_offsets(Connectivity::TwentySix);
  while (!q.empty()) {
    const Index3 p = q.front();
    q.pop_front();
    last = p;
    if (depth.at(p) == steps) break;
    for (const Index3& o : offs) {
      const Index3 n{p.z + o.z, p.y + o.y, p.x + o.x};
      if (!sk.contains(n) || !sk.at(n) || depth.at(n) >= 0) continue;
      depth.at(n) = depth.at(p) + 1;
      q.push_back(n);
    }
  }
  return {last.z + cs.origin.z, last.y + cs.origin.y, last.x + cs.origin.x};
}

std::vector<Index3> spline_path(const Index3& p0, const Index3& p1, const Index3& p2,
                                const Index3& p3, const Shape& shape) {
  auto axis = [](const Index3& p, int k) {
    return static_cast<double>(k == 0 ? p.z : (k == 1 ? p.y : p.x));
  };
  const std::ptrdiff_t cheb =
      std::max({std::abs(p2.z - p1.z), std::abs(p2.y - p1.y), std::abs(p2.x - p1.x)});
  const int samples = static_cast<int>(std::max<std::ptrdiff_t>(1, 2 * cheb));
  std::vector<Index3> knots;
  for (int i = 0; i <= samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const double t2 = t * t, t3 = t2 * t;
    std::ptrdiff_t c[3];
    for (int k = 0; k < 3; ++k) {
      const double a0 = axis(p0, k), a1 = axis(p1, k), a2 = axis(p2, k), a3 = axis(p3, k);
      const double v = 0.5 * (2 * a1 + (-a0 + a2) * t + (2 * a0 - 5 * a1 + 4 * a2 - a3) * t2 +
                              (-a0 + 3 * a1 - 3 * a2 + a3) * t3);
      const auto hi = static_cast<double>(shape[k]) - 1.0;
      c[k] = static_cast<std::ptrdiff_t>(std::lround(std::clamp(v, 0.0, hi)));
    }
    knots.push_back({c[0], c[1], c[2]});
  }
  std::vector<Index3> path;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    auto seg = rasterize_segment(knots[i], knots[i + 1]);
    path.insert(path.end(), seg.begin() + (i == 0 ? 0 : 1), seg.end());
  }
  if (knots.size() == 1) path = knots;
  return path;
}

// Linear indices of the path dilated by the voxel ball of `radius`.
std::vector<std::size_t> thicken(const Mask& like, const std::vector<Index3>& path, int radius) {
  Index3 lo{std::numeric_limits<std::ptrdiff_t>::max(), std::numeric_limits<std::ptrdiff_t>::max(),
            std::numeric_limits<std::ptrdiff_t>::max()};
  Index3 hi{-1, -1, -1};
  for (const Index3& p : path) {
    lo = {std::min(lo.z, p.z), std::min(lo.y, p.y), std::min(lo.x, p.x)};
    hi = {std::max(hi.z, p.z), std::max(hi.y, p.y), std::max(hi.x, p.x)};
  }
  const Shape& s = like.shape();
  lo = {std::max<std::ptrdiff_t>(0, lo.z - radius), std::max<std::ptrdiff_t>(0, lo.y - radius),
        std::max<std::ptrdiff_t>(0, lo.x - radius)};
  hi = {std::min<std::ptrdiff_t>(s.nz - 1, hi.z + radius),
        std::min<std::ptrdiff_t>(s.ny - 1, hi.y + radius),
        std::min<std::ptrdiff_t>(s.nx - 1, hi.x + radius)};
  Mask local({static_cast<std::size_t>(hi.z - lo.z + 1), static_cast<std::size_t>(hi.y - lo.y + 1),
              static_cast<std::size_t>(hi.x - lo.x + 1)},
             like.spacing(), 0);
  for (const Index3& p : path) local(p.z - lo.z, p.y - lo.y, p.x - lo.x) = 1;
  if (radius > 0) local = dilate(local, radius);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < local.size(); ++i) {
    if (!local[i]) continue;
    const Index3 p = local.coord(i);
    out.push_back(like.index(p.z + lo.z, p.y + lo.y, p.x + lo.x));
  }
  return out;
}

RefineAction reduced(RefineAction a) {
  switch (a) {
    case RefineAction::Bridged: return RefineAction::ReducedThenBridged;
    case RefineAction::KeptLargest: return RefineAction::ReducedThenKeptLargest;
    case RefineAction::Zeroed: return RefineAction::ReducedThenZeroed;
    default: return a;
  }
}

}  // namespace

void RefineConfig::validate() const {
  if (t_com < 1) throw ValidationError("t_com must be >= 1");
  if (!(t_dis > 0.0) || !std::isfinite(t_dis)) throw ValidationError("t_dis must be finite and > 0");
  if (bridge_dilation_radius < 0) throw ValidationError("bridge_dilation_radius must be >= 0");
  if (spline_tail < 0) throw ValidationError("spline_tail must be >= 0");
}

std::string_view action_name(RefineAction a) {
  switch (a) {
    case RefineAction::Unchanged: return "unchanged";
    case RefineAction::Bridged: return "bridged";
    case RefineAction::KeptLargest: return "kept-largest";
    case RefineAction::Zeroed: return "zeroed";
    case RefineAction::ReducedThenBridged: return "reduced-then-bridged";
    case RefineAction::ReducedThenKeptLargest: return "reduced-then-kept-largest";
    case RefineAction::ReducedThenZeroed: return "reduced-then-zeroed";
  }
  return "unknown";
}

std::vector<Index3> rasterize_segment(const Index3& a, const Index3& b) {
  const std::ptrdiff_t dz = b.z - a.z, dy = b.y - a.y, dx = b.x - a.x;
  const std::ptrdiff_t n = std::max({std::abs(dz), std::abs(dy), std::abs(dx)});
  std::vector<Index3> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  if (n == 0) return {a};
  for (std::ptrdiff_t t = 0; t <= n; ++t) {
    const double f = static_cast<double>(t) / static_cast<double>(n);
    out.push_back({a.z + std::lround(f * static_cast<double>(dz)),
                   a.y + std::lround(f * static_cast<double>(dy)),
                   a.x + std::lround(f * static_cast<double>(dx))});
  }
  return out;
}

EndpointPair closest_endpoints(const Mask& first, const Mask& second, DistanceUnit unit) {
  require_same_shape(first, second, "closest_endpoints");
  const auto a = component_skeleton(first);
  const auto b = component_skeleton(second);
  if (a.candidates.empty() || b.candidates.empty())
    throw ValidationError("closest_endpoints: empty component");
  return closest_pair(a.candidates, b.candidates, first.spacing(), unit);
}

ClassRefineResult refine_class(const Mask& mask, const RefineConfig& cfg, const Mask* blocked) {
  cfg.validate();
  if (blocked) require_same_shape(mask, *blocked, "refine_class");

  ClassRefineResult res;
  auto& rep = res.report;
  const ComponentSet cs = connected_components(mask, cfg.connectivity);
  rep.components_before = cs.count();

  auto finish = [&](Mask out, RefineAction action) {
    if (cs.count() > 2) action = reduced(action);
    rep.action = action;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (out[i] && !mask[i]) ++rep.voxels_added;
      if (!out[i] && mask[i]) ++rep.voxels_removed;
    }
    rep.components_after = count_components(out, cfg.connectivity);
    out.set_world(mask.world());
    res.mask = std::move(out);
    return res;
  };

  if (cs.count() <= 1) {
    Mask out = mask;
    for (auto& v : out.storage()) v = v ? 1 : 0;
    return finish(std::move(out), RefineAction::Unchanged);
  }

  const auto t_com = static_cast<std::size_t>(cfg.t_com);
  const bool big1 = cs.sizes[0] >= t_com;
  const bool big2 = cs.sizes[1] >= t_com;

  if (!big1 && !big2) return finish(Mask::like(mask, 0), RefineAction::Zeroed);
  if (!(big1 && big2)) return finish(cs.largest(1), RefineAction::KeptLargest);

  const Mask c1 = cs.component(1);
  const Mask c2 = cs.component(2);
  const auto s1 = component_skeleton(c1);
  const auto s2 = component_skeleton(c2);
  const EndpointPair pair = closest_pair(s1.candidates, s2.candidates, mask.spacing(), cfg.t_dis_unit);
  rep.endpoint_distance = pair.distance;
  rep.endpoint_a = pair.a;
  rep.endpoint_b = pair.b;

  if (pair.distance > cfg.t_dis) return finish(cs.largest(1), RefineAction::KeptLargest);

  std::vector<Index3> path;
  if (cfg.bridge_shape == BridgeShape::Spline) {
    const Index3 p0 = walk_back(s1, pair.a, cfg.spline_tail);
    const Index3 p3 = walk_back(s2, pair.b, cfg.spline_tail);
    path = spline_path(p0, pair.a, pair.b, p3, mask.shape());
  } else {
    path = rasterize_segment(pair.a, pair.b);
  }

  Mask out = cs.largest(2);
  for (std::size_t i : thicken(mask, path, cfg.bridge_dilation_radius))
    if (!blocked || !(*blocked)[i]) out[i] = 1;
  if (count_components(out, cfg.connectivity) != 1)
    return finish(cs.largest(1), RefineAction::KeptLargest);
  return finish(std::move(out), RefineAction::Bridged);
}

std::pair<LabelVolume, RefineReport> refine_volume(const LabelVolume& lbl, const RefineConfig& cfg,
                                                   const ClassMap& map) {
  cfg.validate();
  validate_labels(lbl, map);
  std::vector<CowClass> order = cfg.classes_to_refine;
  std::sort(order.begin(), order.end(),
            [](CowClass a, CowClass b) { return class_index(a) < class_index(b); });
  order.erase(std::unique(order.begin(), order.end()), order.end());

  LabelVolume out = lbl;
  RefineReport report;
  for (CowClass c : order) {
    const LabelId id = map.id(c);
    const Mask mask = one_hot(out, c, map);
    Mask blocked = Mask::like(out, 0);
    for (std::size_t i = 0; i < out.size(); ++i) blocked[i] = out[i] != 0 && out[i] != id;
    ClassRefineResult r = refine_class(mask, cfg, &blocked);
    for (std::size_t i = 0; i < out.size(); ++i) {
      if (mask[i] && !r.mask[i]) out[i] = 0;
      else if (r.mask[i] && !mask[i]) out[i] = id;
    }
    r.report.cls = c;
    report.classes.push_back(std::move(r.report));
  }
  return {std::move(out), std::move(report)};
}

}  // namespace cowtopo
