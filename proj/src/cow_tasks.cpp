#include "cowtopo/cow_tasks.hpp"

#include <algorithm>
#include <cmath>

namespace cowtopo {

namespace {

std::size_t extent(std::ptrdiff_t lo, std::ptrdiff_t hi) {
  return hi < lo ? 0 : static_cast<std::size_t>(hi - lo + 1);
}

std::size_t overlap(const BoundingBox3D& a, const BoundingBox3D& b) {
  return extent(std::max(a.min.z, b.min.z), std::min(a.max.z, b.max.z)) *
         extent(std::max(a.min.y, b.min.y), std::min(a.max.y, b.max.y)) *
         extent(std::max(a.min.x, b.min.x), std::min(a.max.x, b.max.x));
}

BoundingBox3D shrink(const BoundingBox3D& b, int d) {
  return {{b.min.z + d, b.min.y + d, b.min.x + d}, {b.max.z - d, b.max.y - d, b.max.x - d}};
}

void check_box(const BoundingBox3D& b) {
  if (!b.valid()) throw ValidationError("box min must be <= max on every axis");
}

}  // namespace

std::size_t BoundingBox3D::volume() const {
  return extent(min.z, max.z) * extent(min.y, max.y) * extent(min.x, max.x);
}

BoundingBox3D roi_box_from_mask(const Mask& roi, Connectivity conn) {
  const Mask lcc = largest_component(roi, conn);
  BoundingBox3D b;
  if (!nonzero_bounds(lcc, b.min, b.max)) throw ValidationError("no RoI predicted");
  return b;
}

std::array<double, 3> voxel_to_world(const Index3& p, const Spacing& spacing, const WorldMeta& world) {
  const double ijk[3] = {static_cast<double>(p.x), static_cast<double>(p.y), static_cast<double>(p.z)};
  std::array<double, 3> out{};
  if (world.sform_code > 0) {
    for (int r = 0; r < 3; ++r)
      out[r] = world.srow[r][0] * ijk[0] + world.srow[r][1] * ijk[1] + world.srow[r][2] * ijk[2] +
               world.srow[r][3];
  } else {
    out = {ijk[0] * spacing.dx, ijk[1] * spacing.dy, ijk[2] * spacing.dz};
  }
  return out;
}

double box_iou(const BoundingBox3D& a, const BoundingBox3D& b) {
  check_box(a);
  check_box(b);
  const double inter = static_cast<double>(overlap(a, b));
  return inter / (static_cast<double>(a.volume() + b.volume()) - inter);
}

double box_boundary_iou(const BoundingBox3D& a, const BoundingBox3D& b, int d) {
  check_box(a);
  check_box(b);
  if (d < 1) throw ValidationError("shell thickness must be >= 1");
  const BoundingBox3D ia = shrink(a, d), ib = shrink(b, d);
  const auto vol = [](const BoundingBox3D& x) { return x.valid() ? x.volume() : std::size_t{0}; };
  const auto ov = [](const BoundingBox3D& x, const BoundingBox3D& y) {
    return x.valid() && y.valid() ? overlap(x, y) : std::size_t{0};
  };
  // shell = box minus inner box; inclusion-exclusion over the four overlaps
  const std::size_t shell_a = a.volume() - vol(ia);
  const std::size_t shell_b = b.volume() - vol(ib);
  const std::size_t inter = overlap(a, b) - ov(ia, b) - ov(a, ib) + ov(ia, ib);
  const std::size_t uni = shell_a + shell_b - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string_view edge_name(GraphEdge e) {
  switch (e) {
    case GraphEdge::LA1: return "L-A1";
    case GraphEdge::Acom: return "Acom";
    case GraphEdge::ThirdA2: return "3rd-A2";
    case GraphEdge::RA1: return "R-A1";
    case GraphEdge::LPcom: return "L-Pcom";
    case GraphEdge::LP1: return "L-P1";
    case GraphEdge::RP1: return "R-P1";
    case GraphEdge::RPcom: return "R-Pcom";
  }
  return "?";
}

int& CowGraph::bit(GraphEdge e) {
  const int k = static_cast<int>(e);
  return k < 4 ? anterior[k] : posterior[k - 4];
}

int CowGraph::bit(GraphEdge e) const { return const_cast<CowGraph*>(this)->bit(e); }

void GraphDeriveConfig::validate() const {
  if (presence_min_voxels < 1) throw ValidationError("presence_min_voxels must be >= 1");
  if (!(adjacency_radius_mm > 0.0) || !std::isfinite(adjacency_radius_mm))
    throw ValidationError("adjacency_radius_mm must be > 0");
}

bool classes_within(const Mask& a, const Mask& b, double radius_mm) {
  require_same_shape(a, b, "classes_within");
  Index3 lo, hi;
  if (!nonzero_bounds(b, lo, hi) || count_nonzero(a) == 0) return false;
  // Only voxels of `a` inside b's box grown by the radius can qualify.
  const Spacing& s = b.spacing();
  const Shape& sh = b.shape();
  const auto grow = [&](std::ptrdiff_t v, double step, std::ptrdiff_t sign, std::size_t n) {
    const auto r = static_cast<std::ptrdiff_t>(std::ceil(radius_mm / step));
    return std::clamp<std::ptrdiff_t>(v + sign * r, 0, static_cast<std::ptrdiff_t>(n) - 1);
  };
  lo = {grow(lo.z, s.dz, -1, sh.nz), grow(lo.y, s.dy, -1, sh.ny), grow(lo.x, s.dx, -1, sh.nx)};
  hi = {grow(hi.z, s.dz, 1, sh.nz), grow(hi.y, s.dy, 1, sh.ny), grow(hi.x, s.dx, 1, sh.nx)};
  const Mask sb = crop(b, lo, hi);
  const Mask sa = crop(a, lo, hi);
  if (count_nonzero(sa) == 0) return false;
  const DistanceField d2 = edt_squared(sb, s);
  const double r2 = radius_mm * radius_mm;
  for (std::size_t i = 0; i < sa.size(); ++i)
    if (sa[i] && d2[i] <= r2 * (1.0 + 1e-12)) return true;
  return false;
}

CowGraph derive_graph(const LabelVolume& lbl, const GraphDeriveConfig& cfg, const ClassMap& map) {
  cfg.validate();
  validate_labels(lbl, map);
  const auto present = [&](CowClass c) {
    const ComponentSet cs = connected_components(one_hot(lbl, c, map));
    return cs.count() > 0 && cs.sizes[0] >= static_cast<std::size_t>(cfg.presence_min_voxels) ? 1 : 0;
  };
  const auto touch = [&](CowClass a, CowClass b) {
    return classes_within(one_hot(lbl, a, map), one_hot(lbl, b, map), cfg.adjacency_radius_mm) ? 1 : 0;
  };
  CowGraph g;
  g.bit(GraphEdge::LA1) = touch(CowClass::LACA, CowClass::LICA);
  g.bit(GraphEdge::Acom) = present(CowClass::Acom);
  g.bit(GraphEdge::ThirdA2) = present(CowClass::ThirdA2);
  g.bit(GraphEdge::RA1) = touch(CowClass::RACA, CowClass::RICA);
  g.bit(GraphEdge::LPcom) = present(CowClass::LPcom);
  g.bit(GraphEdge::LP1) = touch(CowClass::LPCA, CowClass::BA);
  g.bit(GraphEdge::RP1) = touch(CowClass::RPCA, CowClass::BA);
  g.bit(GraphEdge::RPcom) = present(CowClass::RPcom);
  return g;
}

}  // namespace cowtopo
