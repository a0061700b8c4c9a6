#include "cowtopo/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace cowtopo {

namespace {

struct AxisMap {
  std::vector<std::size_t> i0;
  std::vector<std::size_t> i1;
  std::vector<double> w1;  // weight of i1; i0 gets 1 - w1
};

bool same_spacing(double a, double b) { return std::abs(a / b - 1.0) < 1e-6; }

std::size_t output_extent(std::size_t n, double s, double t) {
  if (same_spacing(s, t)) return n;
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * s / t)));
}

AxisMap axis_map(std::size_t n_in, std::size_t n_out, double s, double t, int order) {
  AxisMap m;
  m.i0.resize(n_out);
  m.i1.resize(n_out);
  m.w1.assign(n_out, 0.0);
  const bool identity = same_spacing(s, t) && n_in == n_out;
  for (std::size_t o = 0; o < n_out; ++o) {
    if (identity) {
      m.i0[o] = m.i1[o] = o;
      continue;
    }
    double c = (static_cast<double>(o) + 0.5) * (t / s) - 0.5;
    c = std::clamp(c, 0.0, static_cast<double>(n_in - 1));
    if (order == 0) {
      const auto k = static_cast<std::size_t>(std::floor(c + 0.5));
      m.i0[o] = m.i1[o] = std::min(k, n_in - 1);
      continue;
    }
    const auto k = static_cast<std::size_t>(std::floor(c));
    m.i0[o] = k;
    m.i1[o] = std::min(k + 1, n_in - 1);
    m.w1[o] = c - static_cast<double>(k);
  }
  return m;
}

// Rotation columns of the qform (NIfTI quaternion convention).
std::array<std::array<double, 3>, 3> qform_rotation(const WorldMeta& w) {
  const double b = w.quatern[0], c = w.quatern[1], d = w.quatern[2];
  const double a = std::sqrt(std::max(0.0, 1.0 - (b * b + c * c + d * d)));
  std::array<std::array<double, 3>, 3> r{{{a * a + b * b - c * c - d * d, 2 * (b * c - a * d), 2 * (b * d + a * c)},
                                          {2 * (b * c + a * d), a * a + c * c - b * b - d * d, 2 * (c * d - a * b)},
                                          {2 * (b * d - a * c), 2 * (c * d + a * b), a * a + d * d - c * c - b * b}}};
  for (auto& row : r) row[2] *= w.qfac;
  return r;
}

// Keeps world geometry consistent with the new grid: voxel axes scale by the
// spacing ratio and the origin moves to the new first voxel centre.
WorldMeta rescale_world(const WorldMeta& w, const Spacing& from, const Spacing& to) {
  WorldMeta out = w;
  const std::array<double, 3> ratio{to.dx / from.dx, to.dy / from.dy, to.dz / from.dz};
  const std::array<double, 3> old_step{from.dx, from.dy, from.dz};
  for (int r = 0; r < 3; ++r) {
    double shift = 0;
    for (int k = 0; k < 3; ++k) {
      shift += w.srow[r][k] * (0.5 * ratio[k] - 0.5);
      out.srow[r][k] = static_cast<float>(w.srow[r][k] * ratio[k]);
    }
    out.srow[r][3] = static_cast<float>(w.srow[r][3] + shift);
  }
  const auto rot = qform_rotation(w);
  for (int r = 0; r < 3; ++r) {
    double shift = 0;
    for (int k = 0; k < 3; ++k) shift += rot[r][k] * old_step[k] * (0.5 * ratio[k] - 0.5);
    out.qoffset[r] = static_cast<float>(w.qoffset[r] + shift);
  }
  return out;
}

template <class T, class Combine>
Grid<T> resample_grid(const Grid<T>& v, const Spacing& target, int order, Combine&& combine) {
  v.spacing().validate();
  target.validate();
  const Shape& in = v.shape();
  const Spacing& s = v.spacing();
  const Shape out{output_extent(in.nz, s.dz, target.dz), output_extent(in.ny, s.dy, target.dy),
                  output_extent(in.nx, s.dx, target.dx)};
  const AxisMap mz = axis_map(in.nz, out.nz, s.dz, target.dz, order);
  const AxisMap my = axis_map(in.ny, out.ny, s.dy, target.dy, order);
  const AxisMap mx = axis_map(in.nx, out.nx, s.dx, target.dx, order);

  Grid<T> r(out, target, T{});
  r.set_world(rescale_world(v.world(), s, target));
  for (std::size_t z = 0; z < out.nz; ++z)
    for (std::size_t y = 0; y < out.ny; ++y)
      for (std::size_t x = 0; x < out.nx; ++x)
        r(z, y, x) = combine(v, mz, my, mx, z, y, x);
  return r;
}

}  // namespace

Modality parse_modality(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "cta" || lower == "ct") return Modality::CTA;
  if (lower == "mra" || lower == "mr" || lower == "mri") return Modality::MRA;
  throw ValidationError("unknown modality '" + std::string(s) + "' (expected cta or mra)");
}

std::string_view modality_name(Modality m) { return m == Modality::CTA ? "cta" : "mra"; }

void PreprocessConfig::validate() const {
  for (const auto* w : {&cta_window, &mra_window})
    if (!(w->low < w->high)) throw ValidationError("intensity window needs low < high");
  target_spacing.validate();
  if (intensity_order != 0 && intensity_order != 1)
    throw ValidationError("intensity interpolation order must be 0 or 1");
  if (label_order != 0) throw ValidationError("labels can only be resampled with order 0");
}

Volume truncate(const Volume& v, Modality m, const PreprocessConfig& cfg) {
  const IntensityWindow& w = cfg.window(m);
  Volume out = v;
  for (float& x : out.storage()) x = static_cast<float>(std::clamp<double>(x, w.low, w.high));
  return out;
}

Volume resample(const Volume& v, const PreprocessConfig& cfg) {
  cfg.validate();
  return resample_grid(v, cfg.target_spacing, cfg.intensity_order,
                       [](const Volume& g, const AxisMap& mz, const AxisMap& my, const AxisMap& mx,
                          std::size_t z, std::size_t y, std::size_t x) {
                         const std::size_t zs[2] = {mz.i0[z], mz.i1[z]};
                         const std::size_t ys[2] = {my.i0[y], my.i1[y]};
                         const std::size_t xs[2] = {mx.i0[x], mx.i1[x]};
                         const double wz[2] = {1.0 - mz.w1[z], mz.w1[z]};
                         const double wy[2] = {1.0 - my.w1[y], my.w1[y]};
                         const double wx[2] = {1.0 - mx.w1[x], mx.w1[x]};
                         double acc = 0.0;
                         for (int a = 0; a < 2; ++a)
                           for (int b = 0; b < 2; ++b)
                             for (int c = 0; c < 2; ++c) {
                               const double w = wz[a] * wy[b] * wx[c];
                               if (w != 0.0) acc += w * g(zs[a], ys[b], xs[c]);
                             }
                         return static_cast<float>(acc);
                       });
}

LabelVolume resample(const LabelVolume& v, const PreprocessConfig& cfg) {
  cfg.validate();
  return resample_grid(v, cfg.target_spacing, 0,
                       [](const LabelVolume& g, const AxisMap& mz, const AxisMap& my,
                          const AxisMap& mx, std::size_t z, std::size_t y, std::size_t x) {
                         return g(mz.i0[z], my.i0[y], mx.i0[x]);
                       });
}

Volume normalize(const Volume& v) {
  Volume out = v;
  if (v.empty()) return out;
  const auto [lo_it, hi_it] = std::minmax_element(v.data().begin(), v.data().end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) {
    std::fill(out.storage().begin(), out.storage().end(), 0.0f);
    return out;
  }
  const double range = hi - lo;
  for (float& x : out.storage()) x = static_cast<float>((x - lo) / range);
  return out;
}

Volume preprocess_case(const Volume& v, Modality m, const PreprocessConfig& cfg) {
  cfg.validate();
  return normalize(resample(truncate(v, m, cfg), cfg));
}

}  // namespace cowtopo
