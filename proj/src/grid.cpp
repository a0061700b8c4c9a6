#include "cowtopo/grid.hpp"

#include <algorithm>

namespace cowtopo {

std::string to_string(const Shape& s) {
  return "(" + std::to_string(s.nz) + "," + std::to_string(s.ny) + "," + std::to_string(s.nx) + ")";
}

void Spacing::validate() const {
  if (!valid())
    throw ValidationError("spacing must be positive and finite, got (" + std::to_string(dz) +
                          "," + std::to_string(dy) + "," + std::to_string(dx) + ")");
}

std::size_t count_nonzero(const Mask& m) {
  return static_cast<std::size_t>(
      std::count_if(m.data().begin(), m.data().end(), [](std::uint8_t v) { return v != 0; }));
}

bool nonzero_bounds(const Mask& m, Index3& lo, Index3& hi) {
  const Shape& s = m.shape();
  bool any = false;
  lo = {static_cast<std::ptrdiff_t>(s.nz), static_cast<std::ptrdiff_t>(s.ny),
        static_cast<std::ptrdiff_t>(s.nx)};
  hi = {-1, -1, -1};
  std::size_t i = 0;
  for (std::ptrdiff_t z = 0; z < static_cast<std::ptrdiff_t>(s.nz); ++z)
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(s.ny); ++y)
      for (std::ptrdiff_t x = 0; x < static_cast<std::ptrdiff_t>(s.nx); ++x, ++i) {
        if (!m[i]) continue;
        any = true;
        lo.z = std::min(lo.z, z);
        lo.y = std::min(lo.y, y);
        lo.x = std::min(lo.x, x);
        hi.z = std::max(hi.z, z);
        hi.y = std::max(hi.y, y);
        hi.x = std::max(hi.x, x);
      }
  return any;
}

Mask crop(const Mask& m, const Index3& lo, const Index3& hi, std::size_t pad) {
  const Shape out{static_cast<std::size_t>(hi.z - lo.z + 1) + 2 * pad,
                  static_cast<std::size_t>(hi.y - lo.y + 1) + 2 * pad,
                  static_cast<std::size_t>(hi.x - lo.x + 1) + 2 * pad};
  Mask c(out, m.spacing(), 0);
  for (std::ptrdiff_t z = lo.z; z <= hi.z; ++z)
    for (std::ptrdiff_t y = lo.y; y <= hi.y; ++y)
      for (std::ptrdiff_t x = lo.x; x <= hi.x; ++x)
        c(z - lo.z + pad, y - lo.y + pad, x - lo.x + pad) = m(z, y, x);
  return c;
}

}  // namespace cowtopo
