#include "cowtopo/topo.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <limits>
#include <numeric>

namespace cowtopo {

namespace {

std::ptrdiff_t sz(std::size_t n) { return static_cast<std::ptrdiff_t>(n); }

// ---------------------------------------------------------------------------
// Union-find with path halving. Labels are provisional indices into `parent`.

class DisjointSets {
 public:
  std::uint32_t make() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return parent_.back();
  }
  std::uint32_t find(std::uint32_t a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) std::swap(a, b);
    parent_[a] = b;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

// Offsets that precede the current voxel in raster order.
std::vector<Index3> backward_offsets(Connectivity conn) {
  std::vector<Index3> out;
  for (const Index3& d : neighbor_offsets(conn))
    if (d.z < 0 || (d.z == 0 && d.y < 0) || (d.z == 0 && d.y == 0 && d.x < 0)) out.push_back(d);
  return out;
}

// Two-pass labelling; returns provisional labels per voxel (0 = background)
// resolved to their union-find roots, and the root set.
Grid<std::uint32_t> provisional_labels(const Mask& mask, Connectivity conn, DisjointSets& sets) {
  const Shape& s = mask.shape();
  Grid<std::uint32_t> lab = Grid<std::uint32_t>::like(mask, 0);
  const auto back = backward_offsets(conn);
  sets.make();  // index 0 reserved for background
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < sz(s.nz); ++z)
    for (std::ptrdiff_t y = 0; y < sz(s.ny); ++y)
      for (std::ptrdiff_t x = 0; x < sz(s.nx); ++x, ++i) {
        if (!mask[i]) continue;
        std::uint32_t cur = 0;
        for (const Index3& d : back) {
          const Index3 q{z + d.z, y + d.y, x + d.x};
          if (!mask.contains(q)) continue;
          const std::uint32_t l = lab.at(q);
          if (!l) continue;
          if (!cur)
            cur = l;
          else
            sets.unite(cur, l);
        }
        lab[i] = cur ? cur : sets.make();
      }
  for (auto& l : lab.storage())
    if (l) l = sets.find(l);
  return lab;
}

// ---------------------------------------------------------------------------
// 3x3x3 neighbourhood topology. Cube index = (dz+1)*9 + (dy+1)*3 + (dx+1).

constexpr int kCenter = 13;

struct CubeTables {
  std::array<std::uint32_t, 27> adj26{};  // 26-neighbours inside the cube
  std::array<std::uint32_t, 27> adj6{};   // 6-neighbours inside the cube
  std::uint32_t n26 = 0;                  // all but center
  std::uint32_t n18 = 0;                  // faces and edges, center excluded
  std::uint32_t n6 = 0;                   // faces only

  CubeTables() {
    for (int a = 0; a < 27; ++a) {
      const int az = a / 9 - 1, ay = (a / 3) % 3 - 1, ax = a % 3 - 1;
      const int nonzero = (az != 0) + (ay != 0) + (ax != 0);
      if (a != kCenter) n26 |= 1u << a;
      if (nonzero == 1 || nonzero == 2) n18 |= 1u << a;
      if (nonzero == 1) n6 |= 1u << a;
      for (int b = 0; b < 27; ++b) {
        if (a == b) continue;
        const int dz = std::abs(b / 9 - 1 - az), dy = std::abs((b / 3) % 3 - 1 - ay),
                  dx = std::abs(b % 3 - 1 - ax);
        if (std::max({dz, dy, dx}) == 1) adj26[a] |= 1u << b;
        if (dz + dy + dx == 1) adj6[a] |= 1u << b;
      }
    }
  }
};

const CubeTables& cube_tables() {
  static const CubeTables t;
  return t;
}

// Grows `seed` inside `allowed` using the given adjacency table.
std::uint32_t flood(std::uint32_t seed, std::uint32_t allowed,
                    const std::array<std::uint32_t, 27>& adj) {
  std::uint32_t reached = seed;
  std::uint32_t frontier = seed;
  while (frontier) {
    std::uint32_t next = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) next |= adj[std::countr_zero(f)];
    next &= allowed & ~reached;
    reached |= next;
    frontier = next;
  }
  return reached;
}

// Bertrand's characterization: x is simple iff the foreground in N26*(x) has
// one 26-component and the background in N18(x) has exactly one 6-component
// that is 6-adjacent to x.
bool simple_in_cube(std::uint32_t cube) {
  const CubeTables& t = cube_tables();
  const std::uint32_t fg = cube & t.n26;
  if (!fg) return false;
  if (flood(fg & -fg, fg, t.adj26) != fg) return false;

  const std::uint32_t bg18 = ~cube & t.n18;
  const std::uint32_t bg_faces = bg18 & t.n6;
  if (!bg_faces) return false;
  const std::uint32_t comp = flood(bg_faces & -bg_faces, bg18, t.adj6);
  return (bg_faces & ~comp) == 0;
}

std::uint32_t cube_at(const Mask& m, std::ptrdiff_t z, std::ptrdiff_t y, std::ptrdiff_t x) {
  std::uint32_t cube = 0;
  int k = 0;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx, ++k) {
        const Index3 q{z + dz, y + dy, x + dx};
        if (m.contains(q) && m.at(q)) cube |= 1u << k;
      }
  return cube;
}

// ---------------------------------------------------------------------------
// 1D squared-distance transform along one line with sample pitch `step`.
// f holds 0 for reference samples and +inf elsewhere on the first pass, and
// partial squared distances afterwards.

void lower_envelope_1d(std::span<double> f, double step, std::vector<std::size_t>& v,
                       std::vector<double>& zb, std::vector<double>& out) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const std::size_t n = f.size();
  v.resize(n);
  zb.resize(n + 1);
  out.resize(n);

  std::size_t k = 0;
  bool any = false;
  for (std::size_t q = 0; q < n; ++q) {
    if (f[q] == kInf) continue;
    const double pq = static_cast<double>(q) * step;
    if (!any) {
      v[0] = q;
      zb[0] = -kInf;
      zb[1] = kInf;
      any = true;
      continue;
    }
    double s;
    while (true) {
      const double pv = static_cast<double>(v[k]) * step;
      s = ((f[q] + pq * pq) - (f[v[k]] + pv * pv)) / (2.0 * (pq - pv));
      if (s <= zb[k] && k > 0) {
        --k;
        continue;
      }
      break;
    }
    if (s <= zb[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      zb[0] = -kInf;
      zb[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    zb[k] = s;
    zb[k + 1] = kInf;
  }
  if (!any) return;

  k = 0;
  for (std::size_t q = 0; q < n; ++q) {
    const double pq = static_cast<double>(q) * step;
    while (zb[k + 1] < pq) ++k;
    const double d = pq - static_cast<double>(v[k]) * step;
    out[q] = d * d + f[v[k]];
  }
  std::copy(out.begin(), out.end(), f.begin());
}

}  // namespace

Connectivity connectivity_from_int(int n) {
  switch (n) {
    case 6: return Connectivity::Six;
    case 18: return Connectivity::Eighteen;
    case 26: return Connectivity::TwentySix;
    default: throw ValidationError("connectivity must be 6, 18 or 26, got " + std::to_string(n));
  }
}

std::vector<Index3> neighbor_offsets(Connectivity conn) {
  std::vector<Index3> out;
  const int limit = conn == Connectivity::Six ? 1 : (conn == Connectivity::Eighteen ? 2 : 3);
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        const int nonzero = (dz != 0) + (dy != 0) + (dx != 0);
        if (nonzero == 0 || nonzero > limit) continue;
        out.push_back({dz, dy, dx});
      }
  return out;
}

Mask ComponentSet::component(std::uint32_t id) const {
  Mask m = Mask::like(labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = labels[i] == id ? 1 : 0;
  return m;
}

Mask ComponentSet::largest(std::size_t k) const {
  Mask m = Mask::like(labels, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) m[i] = (labels[i] != 0 && labels[i] <= k) ? 1 : 0;
  return m;
}

ComponentSet connected_components(const Mask& mask, Connectivity conn) {
  DisjointSets sets;
  Grid<std::uint32_t> lab = provisional_labels(mask, conn, sets);

  struct Root {
    std::size_t size = 0;
    std::size_t first = std::numeric_limits<std::size_t>::max();
  };
  std::vector<Root> roots(sets.size());
  for (std::size_t i = 0; i < lab.size(); ++i) {
    const std::uint32_t r = lab[i];
    if (!r) continue;
    if (roots[r].size == 0) roots[r].first = i;
    ++roots[r].size;
  }
  std::vector<std::uint32_t> order;
  for (std::uint32_t r = 1; r < roots.size(); ++r)
    if (roots[r].size) order.push_back(r);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (roots[a].size != roots[b].size) return roots[a].size > roots[b].size;
    return roots[a].first < roots[b].first;
  });

  std::vector<std::uint32_t> remap(roots.size(), 0);
  ComponentSet out;
  out.sizes.reserve(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    remap[order[k]] = static_cast<std::uint32_t>(k + 1);
    out.sizes.push_back(roots[order[k]].size);
  }
  for (auto& l : lab.storage()) l = remap[l];
  out.labels = std::move(lab);
  return out;
}

std::size_t count_components(const Mask& mask, Connectivity conn) {
  DisjointSets sets;
  const Grid<std::uint32_t> lab = provisional_labels(mask, conn, sets);
  std::vector<bool> seen(sets.size(), false);
  std::size_t n = 0;
  for (std::uint32_t l : lab.data())
    if (l && !seen[l]) {
      seen[l] = true;
      ++n;
    }
  return n;
}

Mask largest_component(const Mask& mask, Connectivity conn) {
  return connected_components(mask, conn).largest(1);
}

DistanceField edt_squared(const Mask& reference, const Spacing& spacing) {
  spacing.validate();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const Shape& s = reference.shape();
  DistanceField f(s, spacing, kInf);
  f.set_world(reference.world());
  for (std::size_t i = 0; i < reference.size(); ++i)
    if (reference[i]) f[i] = 0.0;

  std::vector<std::size_t> v;
  std::vector<double> zb, out, line;

  // x lines are contiguous.
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t y = 0; y < s.ny; ++y)
      lower_envelope_1d(std::span<double>(f.storage().data() + f.index(z, y, 0), s.nx), spacing.dx,
                        v, zb, out);

  auto strided_pass = [&](std::size_t n_line, double step, auto&& at) {
    line.resize(n_line);
    for (std::size_t k = 0; k < n_line; ++k) line[k] = at(k);
    lower_envelope_1d(line, step, v, zb, out);
    for (std::size_t k = 0; k < n_line; ++k) at(k) = line[k];
  };
  for (std::size_t z = 0; z < s.nz; ++z)
    for (std::size_t x = 0; x < s.nx; ++x)
      strided_pass(s.ny, spacing.dy, [&](std::size_t k) -> double& { return f(z, k, x); });
  for (std::size_t y = 0; y < s.ny; ++y)
    for (std::size_t x = 0; x < s.nx; ++x)
      strided_pass(s.nz, spacing.dz, [&](std::size_t k) -> double& { return f(k, y, x); });
  return f;
}

DistanceField edt(const Mask& reference, const Spacing& spacing) {
  if (count_nonzero(reference) == 0) throw ValidationError("empty reference set");
  DistanceField f = edt_squared(reference, spacing);
  for (double& d : f.storage()) d = std::sqrt(d);
  return f;
}

bool is_simple_point(const Mask& mask, const Index3& p) {
  return simple_in_cube(cube_at(mask, p.z, p.y, p.x));
}

Skeleton skeletonize(const Mask& mask) {
  const Shape& s = mask.shape();
  Mask img = Mask::like(mask, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) img[i] = mask[i] ? 1 : 0;

  // x-, x+, y+, y-, z+, z-
  constexpr std::array<Index3, 6> kBorders{
      {{0, 0, -1}, {0, 0, 1}, {0, 1, 0}, {0, -1, 0}, {1, 0, 0}, {-1, 0, 0}}};

  auto is_background = [&](std::ptrdiff_t z, std::ptrdiff_t y, std::ptrdiff_t x) {
    const Index3 q{z, y, x};
    return !img.contains(q) || !img.at(q);
  };

  std::vector<Index3> candidates;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Index3& dir : kBorders) {
      candidates.clear();
      std::size_t i = 0;
      for (std::ptrdiff_t z = 0; z < sz(s.nz); ++z)
        for (std::ptrdiff_t y = 0; y < sz(s.ny); ++y)
          for (std::ptrdiff_t x = 0; x < sz(s.nx); ++x, ++i) {
            if (!img[i]) continue;
            if (!is_background(z + dir.z, y + dir.y, x + dir.x)) continue;
            const std::uint32_t cube = cube_at(img, z, y, x);
            if (std::popcount(cube & cube_tables().n26) == 1) continue;  // line end
            if (!simple_in_cube(cube)) continue;
            candidates.push_back({z, y, x});
          }
      // Sequential re-check: earlier deletions in this sub-iteration can make
      // a candidate non-simple or turn it into a line end.
      for (const Index3& p : candidates) {
        const std::uint32_t cube = cube_at(img, p.z, p.y, p.x);
        if (std::popcount(cube & cube_tables().n26) <= 1) continue;
        if (!simple_in_cube(cube)) continue;
        img.at(p) = 0;
        changed = true;
      }
    }
  }

  Skeleton out;
  out.endpoints = skeleton_endpoints(img);
  out.centerline = std::move(img);
  return out;
}

std::vector<Index3> skeleton_endpoints(const Mask& skeleton) {
  const Shape& s = skeleton.shape();
  const auto offsets = neighbor_offsets(Connectivity::TwentySix);
  std::vector<Index3> ends;
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < sz(s.nz); ++z)
    for (std::ptrdiff_t y = 0; y < sz(s.ny); ++y)
      for (std::ptrdiff_t x = 0; x < sz(s.nx); ++x, ++i) {
        if (!skeleton[i]) continue;
        int n = 0;
        for (const Index3& d : offsets) {
          const Index3 q{z + d.z, y + d.y, x + d.x};
          if (skeleton.contains(q) && skeleton.at(q) && ++n > 1) break;
        }
        if (n <= 1) ends.push_back({z, y, x});
      }
  return ends;
}

Mask dilate(const Mask& mask, int radius_vox) {
  if (radius_vox < 0) throw ValidationError("dilation radius must be >= 0");
  Mask out = Mask::like(mask, 0);
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = mask[i] ? 1 : 0;
  if (radius_vox == 0 || count_nonzero(mask) == 0) return out;
  // Squared voxel distances are exact integers in double.
  const DistanceField d2 = edt_squared(mask, Spacing{1.0, 1.0, 1.0});
  const double r2 = static_cast<double>(radius_vox) * radius_vox;
  for (std::size_t i = 0; i < mask.size(); ++i) out[i] = d2[i] <= r2 ? 1 : 0;
  return out;
}

}  // namespace cowtopo
