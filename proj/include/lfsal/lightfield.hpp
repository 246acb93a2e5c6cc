#ifndef LFSAL_LIGHTFIELD_HPP
#define LFSAL_LIGHTFIELD_HPP

#include <string>
#include <utility>

#include "lfsal/image.hpp"

namespace lfsal {

/// Two-plane light field L(u, v, x, y) with C colour channels, stored
/// row-major as (v, u, y, x, c). The angular grid is always square.
template <typename T>
class LightField4D {
 public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  LightField4D() = default;
  LightField4D(Index nv, Index nu, Index ny, Index nx, Index channels, T fill = T(0))
      : a_(nu), ny_(ny), nx_(nx), c_(channels) {
    if (nu != nv) {
      throw ConfigError("light field angular grid must be square, got " + std::to_string(nv) + "x" +
                        std::to_string(nu));
    }
    if (nu < 1 || ny < 1 || nx < 1 || channels < 1) throw ConfigError("light field extents must be >= 1");
    data_ = Vector::Constant(nu * nu * ny * nx * channels, fill);
  }

  Index angular() const noexcept { return a_; }
  Index nu() const noexcept { return a_; }
  Index nv() const noexcept { return a_; }
  Index ny() const noexcept { return ny_; }
  Index nx() const noexcept { return nx_; }
  Index channels() const noexcept { return c_; }

  T& operator()(Index v, Index u, Index y, Index x, Index c = 0) {
    return data_[(((v * a_ + u) * ny_ + y) * nx_ + x) * c_ + c];
  }
  T operator()(Index v, Index u, Index y, Index x, Index c = 0) const {
    return data_[(((v * a_ + u) * ny_ + y) * nx_ + x) * c_ + c];
  }

  Vector& values() noexcept { return data_; }
  const Vector& values() const noexcept { return data_; }

  bool in_unit_range() const {
    return data_.size() == 0 || (data_.minCoeff() >= T(0) && data_.maxCoeff() <= T(1));
  }

  friend bool operator==(const LightField4D& a, const LightField4D& b) {
    return a.a_ == b.a_ && a.ny_ == b.ny_ && a.nx_ == b.nx_ && a.c_ == b.c_ && a.data_ == b.data_;
  }

 private:
  Index a_ = 0, ny_ = 0, nx_ = 0, c_ = 1;
  Vector data_;
};

/// Tiling of micro-lens images: pixel (y A + v, x A + u) holds view (u, v) of
/// spatial location (x, y).
template <typename T>
struct MicroLensArray {
  Image<T> pixels;
  Index angular_res = 1;

  Index height() const { return pixels.height(); }
  Index width() const { return pixels.width(); }
  Index channels() const { return pixels.channels(); }
  Index ny() const { return pixels.height() / angular_res; }
  Index nx() const { return pixels.width() / angular_res; }
};

template <typename T>
struct SubApertureImage {
  Image<T> image;  // N_y x N_x x C
  Index u = 0, v = 0;
};

template <typename T>
struct MicroLensImage {
  Image<T> image;  // N_v x N_u x C
  Index x = 0, y = 0;
};

constexpr Index central_view_index(Index angular_res) { return angular_res / 2; }

template <typename T>
MicroLensArray<T> assemble_microlens_array(const LightField4D<T>& lf) {
  const Index a = lf.angular();
  MicroLensArray<T> arr{Image<T>(lf.ny() * a, lf.nx() * a, lf.channels()), a};
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u)
      for (Index y = 0; y < lf.ny(); ++y)
        for (Index x = 0; x < lf.nx(); ++x)
          for (Index c = 0; c < lf.channels(); ++c) arr.pixels(y * a + v, x * a + u, c) = lf(v, u, y, x, c);
  return arr;
}

inline void require_divisible(Index height, Index width, Index a) {
  if (a < 1) throw ConfigError("angular resolution must be >= 1, got " + std::to_string(a));
  if (width % a != 0) {
    throw DataError("micro-lens array width " + std::to_string(width) + " is not divisible by " +
                    std::to_string(a));
  }
  if (height % a != 0) {
    throw DataError("micro-lens array height " + std::to_string(height) + " is not divisible by " +
                    std::to_string(a));
  }
}

template <typename T>
LightField4D<T> disassemble_microlens_array(const Image<T>& pixels, Index a) {
  require_divisible(pixels.height(), pixels.width(), a);
  const Index ny = pixels.height() / a, nx = pixels.width() / a;
  LightField4D<T> lf(a, a, ny, nx, pixels.channels());
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u)
      for (Index y = 0; y < ny; ++y)
        for (Index x = 0; x < nx; ++x)
          for (Index c = 0; c < pixels.channels(); ++c) lf(v, u, y, x, c) = pixels(y * a + v, x * a + u, c);
  return lf;
}

template <typename T>
LightField4D<T> disassemble_microlens_array(const MicroLensArray<T>& arr) {
  return disassemble_microlens_array(arr.pixels, arr.angular_res);
}

template <typename T>
SubApertureImage<T> extract_subaperture(const LightField4D<T>& lf, Index u, Index v) {
  if (u < 0 || u >= lf.nu() || v < 0 || v >= lf.nv()) {
    throw BoundsError("viewpoint (" + std::to_string(u) + "," + std::to_string(v) + ") outside " +
                      std::to_string(lf.nu()) + "x" + std::to_string(lf.nv()) + " grid");
  }
  SubApertureImage<T> s{Image<T>(lf.ny(), lf.nx(), lf.channels()), u, v};
  for (Index y = 0; y < lf.ny(); ++y)
    for (Index x = 0; x < lf.nx(); ++x)
      for (Index c = 0; c < lf.channels(); ++c) s.image(y, x, c) = lf(v, u, y, x, c);
  return s;
}

template <typename T>
void insert_subaperture(LightField4D<T>& lf, const SubApertureImage<T>& view) {
  if (view.u < 0 || view.u >= lf.nu() || view.v < 0 || view.v >= lf.nv()) {
    throw BoundsError("viewpoint (" + std::to_string(view.u) + "," + std::to_string(view.v) + ") outside grid");
  }
  if (view.image.height() != lf.ny() || view.image.width() != lf.nx() || view.image.channels() != lf.channels()) {
    throw DataError("sub-aperture image dims do not match the light field");
  }
  for (Index y = 0; y < lf.ny(); ++y)
    for (Index x = 0; x < lf.nx(); ++x)
      for (Index c = 0; c < lf.channels(); ++c) lf(view.v, view.u, y, x, c) = view.image(y, x, c);
}

template <typename T>
SubApertureImage<T> central_view(const LightField4D<T>& lf) {
  const Index c = central_view_index(lf.angular());
  return extract_subaperture(lf, c, c);
}

/// Central view read straight off a micro-lens array (stride-A subsampling).
template <typename T>
Image<T> central_view(const MicroLensArray<T>& arr) {
  const Index a = arr.angular_res, c0 = central_view_index(a);
  require_divisible(arr.height(), arr.width(), a);
  Image<T> out(arr.ny(), arr.nx(), arr.channels());
  for (Index y = 0; y < out.height(); ++y)
    for (Index x = 0; x < out.width(); ++x)
      for (Index c = 0; c < out.channels(); ++c) out(y, x, c) = arr.pixels(y * a + c0, x * a + c0, c);
  return out;
}

template <typename T>
MicroLensImage<T> extract_microlens(const LightField4D<T>& lf, Index x, Index y) {
  if (x < 0 || x >= lf.nx() || y < 0 || y >= lf.ny()) {
    throw BoundsError("micro-lens location (" + std::to_string(x) + "," + std::to_string(y) + ") outside " +
                      std::to_string(lf.nx()) + "x" + std::to_string(lf.ny()));
  }
  MicroLensImage<T> m{Image<T>(lf.nv(), lf.nu(), lf.channels()), x, y};
  for (Index v = 0; v < lf.nv(); ++v)
    for (Index u = 0; u < lf.nu(); ++u)
      for (Index c = 0; c < lf.channels(); ++c) m.image(v, u, c) = lf(v, u, y, x, c);
  return m;
}

/// Keeps the centred target x target block of views, offset
/// floor((N_u - target) / 2) on both axes.
template <typename T>
LightField4D<T> sample_viewpoints(const LightField4D<T>& lf, Index target) {
  if (target < 1 || target > lf.angular()) {
    throw ConfigError("sample_viewpoints: target " + std::to_string(target) + " not in [1, " +
                      std::to_string(lf.angular()) + "]");
  }
  const Index o = (lf.angular() - target) / 2;
  LightField4D<T> out(target, target, lf.ny(), lf.nx(), lf.channels());
  for (Index v = 0; v < target; ++v)
    for (Index u = 0; u < target; ++u)
      for (Index y = 0; y < lf.ny(); ++y)
        for (Index x = 0; x < lf.nx(); ++x)
          for (Index c = 0; c < lf.channels(); ++c) out(v, u, y, x, c) = lf(v + o, u + o, y, x, c);
  return out;
}

/// Embeds lf in the centre of a target x target grid; every added view is
/// `fill` (an all-focus image, or the central view when none is available).
template <typename T>
LightField4D<T> pad_angular(const LightField4D<T>& lf, Index target, const Image<T>& fill) {
  if (target < lf.angular()) {
    throw ConfigError("pad_angular: target " + std::to_string(target) + " is below current " +
                      std::to_string(lf.angular()));
  }
  if (fill.height() != lf.ny() || fill.width() != lf.nx() || fill.channels() != lf.channels()) {
    throw DataError("pad_angular: fill image is " + std::to_string(fill.height()) + "x" +
                    std::to_string(fill.width()) + ", light field views are " + std::to_string(lf.ny()) + "x" +
                    std::to_string(lf.nx()));
  }
  const Index o = (target - lf.angular()) / 2;
  LightField4D<T> out(target, target, lf.ny(), lf.nx(), lf.channels());
  for (Index v = 0; v < target; ++v) {
    for (Index u = 0; u < target; ++u) {
      const bool inside = v >= o && v < o + lf.angular() && u >= o && u < o + lf.angular();
      for (Index y = 0; y < lf.ny(); ++y)
        for (Index x = 0; x < lf.nx(); ++x)
          for (Index c = 0; c < lf.channels(); ++c)
            out(v, u, y, x, c) = inside ? lf(v - o, u - o, y, x, c) : fill(y, x, c);
    }
  }
  return out;
}

/// Rotates the spatial and the angular grid together, counter-clockwise. The
/// assembled array of the result is the pixel-wise rotation of the original
/// array.
template <typename T>
LightField4D<T> rotate_lightfield(const LightField4D<T>& lf, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return lf;
  const Index a = lf.angular();
  const bool swap = (k % 2) == 1;
  const Index ny = swap ? lf.nx() : lf.ny(), nx = swap ? lf.ny() : lf.nx();
  // Same index map as rotate_image, on (y, x) and on (v, u).
  auto src = [k](Index i, Index j, Index h, Index w) {
    if (k == 1) return std::pair<Index, Index>{j, w - 1 - i};
    if (k == 2) return std::pair<Index, Index>{h - 1 - i, w - 1 - j};
    return std::pair<Index, Index>{h - 1 - j, i};
  };
  LightField4D<T> out(a, a, ny, nx, lf.channels());
  for (Index v = 0; v < a; ++v) {
    for (Index u = 0; u < a; ++u) {
      const auto [sv, su] = src(v, u, a, a);
      for (Index y = 0; y < ny; ++y) {
        for (Index x = 0; x < nx; ++x) {
          const auto [sy, sx] = src(y, x, lf.ny(), lf.nx());
          for (Index c = 0; c < lf.channels(); ++c) out(v, u, y, x, c) = lf(sv, su, sy, sx, c);
        }
      }
    }
  }
  return out;
}

/// Simultaneous spatial+angular mirror: horizontal maps (u, x) to
/// (N_u - 1 - u, N_x - 1 - x), vertical does the same for (v, y).
template <typename T>
LightField4D<T> flip_lightfield(const LightField4D<T>& lf, FlipAxis axis) {
  const Index a = lf.angular();
  LightField4D<T> out(a, a, lf.ny(), lf.nx(), lf.channels());
  const bool h = axis == FlipAxis::horizontal;
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u)
      for (Index y = 0; y < lf.ny(); ++y)
        for (Index x = 0; x < lf.nx(); ++x)
          for (Index c = 0; c < lf.channels(); ++c)
            out(v, u, y, x, c) = h ? lf(v, a - 1 - u, y, lf.nx() - 1 - x, c)
                                   : lf(a - 1 - v, u, lf.ny() - 1 - y, x, c);
  return out;
}

}  // namespace lfsal

#endif  // LFSAL_LIGHTFIELD_HPP
