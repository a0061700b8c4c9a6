#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cowtopo/errors.hpp"

namespace cowtopo {

/// Voxel counts in z-major order. x is the fastest-varying axis in memory.
struct Shape {
  std::size_t nz = 0;
  std::size_t ny = 0;
  std::size_t nx = 0;

  constexpr std::size_t size() const { return nz * ny * nx; }
  constexpr std::size_t operator[](int axis) const {
    return axis == 0 ? nz : (axis == 1 ? ny : nx);
  }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

/// Millimetres per voxel along z, y, x.
struct Spacing {
  double dz = 1.0;
  double dy = 1.0;
  double dx = 1.0;

  constexpr double operator[](int axis) const {
    return axis == 0 ? dz : (axis == 1 ? dy : dx);
  }
  bool valid() const {
    return std::isfinite(dz) && std::isfinite(dy) && std::isfinite(dx) &&
           dz > 0 && dy > 0 && dx > 0;
  }
  void validate() const;
  friend constexpr bool operator==(const Spacing&, const Spacing&) = default;
};

struct Index3 {
  std::ptrdiff_t z = 0;
  std::ptrdiff_t y = 0;
  std::ptrdiff_t x = 0;
  friend constexpr bool operator==(const Index3&, const Index3&) = default;
};

/// World-coordinate metadata carried through from NIfTI headers. Nothing in
/// the toolkit interprets it except resampling, which rescales the sform
/// columns so that world geometry is kept consistent with the new spacing.
struct WorldMeta {
  short qform_code = 0;
  short sform_code = 0;
  float qfac = 1.0f;
  std::array<float, 3> quatern{0, 0, 0};
  std::array<float, 3> qoffset{0, 0, 0};
  std::array<std::array<float, 4>, 3> srow{{{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}}};
  friend bool operator==(const WorldMeta&, const WorldMeta&) = default;
};

/// Dense 3D grid in z-major order with spacing and world metadata.
template <class T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  explicit Grid(Shape shape, Spacing spacing = {}, T fill = T{})
      : shape_(shape), spacing_(spacing), data_(shape.size(), fill) {}
  Grid(Shape shape, Spacing spacing, std::vector<T> data)
      : shape_(shape), spacing_(spacing), data_(std::move(data)) {
    if (data_.size() != shape_.size())
      throw ValidationError("data length " + std::to_string(data_.size()) +
                            " does not match shape " + to_string(shape_));
  }

  /// Empty grid with the same geometry as `other`.
  template <class U>
  static Grid like(const Grid<U>& other, T fill = T{}) {
    Grid g(other.shape(), other.spacing(), fill);
    g.world_ = other.world();
    return g;
  }

  const Shape& shape() const { return shape_; }
  const Spacing& spacing() const { return spacing_; }
  const WorldMeta& world() const { return world_; }
  void set_spacing(const Spacing& s) { spacing_ = s; }
  void set_world(const WorldMeta& w) { world_ = w; }

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  std::size_t index(std::size_t z, std::size_t y, std::size_t x) const {
    return (z * shape_.ny + y) * shape_.nx + x;
  }
  Index3 coord(std::size_t i) const {
    const std::size_t x = i % shape_.nx;
    const std::size_t y = (i / shape_.nx) % shape_.ny;
    const std::size_t z = i / (shape_.nx * shape_.ny);
    return {static_cast<std::ptrdiff_t>(z), static_cast<std::ptrdiff_t>(y),
            static_cast<std::ptrdiff_t>(x)};
  }
  bool contains(const Index3& p) const {
    return p.z >= 0 && p.y >= 0 && p.x >= 0 &&
           p.z < static_cast<std::ptrdiff_t>(shape_.nz) &&
           p.y < static_cast<std::ptrdiff_t>(shape_.ny) &&
           p.x < static_cast<std::ptrdiff_t>(shape_.nx);
  }

  T& operator()(std::size_t z, std::size_t y, std::size_t x) { return data_[index(z, y, x)]; }
  const T& operator()(std::size_t z, std::size_t y, std::size_t x) const {
    return data_[index(z, y, x)];
  }
  T& at(const Index3& p) { return (*this)(p.z, p.y, p.x); }
  const T& at(const Index3& p) const { return (*this)(p.z, p.y, p.x); }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  Shape shape_;
  Spacing spacing_;
  WorldMeta world_;
  std::vector<T> data_;
};

/// Binary grid; any nonzero value is foreground.
using Mask = Grid<std::uint8_t>;

std::size_t count_nonzero(const Mask& m);

template <class A, class B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, const char* what) {
  if (a.shape() != b.shape())
    throw ValidationError(std::string(what) + ": shape mismatch " + to_string(a.shape()) +
                          " vs " + to_string(b.shape()));
}

/// Inclusive voxel bounding box of the nonzero voxels. Returns false if none.
bool nonzero_bounds(const Mask& m, Index3& lo, Index3& hi);

/// Copy of the sub-block [lo, hi] (inclusive), padded by `pad` zero voxels per side.
Mask crop(const Mask& m, const Index3& lo, const Index3& hi, std::size_t pad = 0);

}  // namespace cowtopo
