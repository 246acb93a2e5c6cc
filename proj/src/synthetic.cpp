#include "lfsal/synthetic.hpp"

#include <algorithm>
#include <array>
#include <functional>

namespace lfsal {
namespace {

struct Region {
  bool ellipse = false;
  double cy = 0, cx = 0, ry = 0, rx = 0;

  bool contains(double y, double x) const {
    const double dy = (y - cy) / ry, dx = (x - cx) / rx;
    return ellipse ? dy * dy + dx * dx <= 1.0 : std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0;
  }
};

Region random_region(Index ny, Index nx, RngStream& rng) {
  Region r;
  r.ellipse = rng.uniform() < 0.5;
  r.ry = rng.uniform(0.18, 0.32) * static_cast<double>(ny);
  r.rx = rng.uniform(0.18, 0.32) * static_cast<double>(nx);
  r.cy = rng.uniform(r.ry, static_cast<double>(ny) - r.ry);
  r.cx = rng.uniform(r.rx, static_cast<double>(nx) - r.rx);
  return r;
}

// Renders fg over bg with per-view shifts; colour functions take unshifted
// scene coordinates.
template <typename T>
LightField4D<T> render(Index ny, Index nx, Index a, Index disparity, const Region& region,
                       const std::function<T(Index, Index, Index)>& fg,
                       const std::function<T(Index, Index, Index)>& bg, Image<T>* mask) {
  LightField4D<T> lf(a, a, ny, nx, 3);
  const Index c = central_view_index(a);
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u) {
      const Index sy = disparity * (v - c), sx = disparity * (u - c);
      for (Index y = 0; y < ny; ++y)
        for (Index x = 0; x < nx; ++x) {
          const Index fy = y - sy, fx = x - sx;
          const bool in_fg = region.contains(static_cast<double>(fy) + 0.5, static_cast<double>(fx) + 0.5);
          for (Index ch = 0; ch < 3; ++ch) lf(v, u, y, x, ch) = in_fg ? fg(fy, fx, ch) : bg(y, x, ch);
        }
    }
  if (mask) {
    *mask = Image<T>(ny, nx, 1);
    for (Index y = 0; y < ny; ++y)
      for (Index x = 0; x < nx; ++x) (*mask)(y, x) = region.contains(y + 0.5, x + 0.5) ? T(1) : T(0);
  }
  return lf;
}

}  // namespace

template <typename T>
LightField4D<T> rect_scene(Index ny, Index nx, Index a, Index disparity, RngStream& rng, Image<T>* mask) {
  Region region = random_region(ny, nx, rng);
  region.ellipse = false;
  std::array<double, 3> fg_rgb{}, bg_rgb{};
  for (auto& v : fg_rgb) v = rng.uniform(0.55, 0.95);
  for (auto& v : bg_rgb) v = rng.uniform(0.05, 0.45);
  const Index margin = disparity * a;
  const Index th = ny + 2 * margin, tw = nx + 2 * margin;
  std::vector<double> tex(static_cast<std::size_t>(th * tw));
  for (auto& t : tex) t = rng.uniform(-0.05, 0.05);
  auto texel = [&](Index y, Index x) {
    y = std::clamp<Index>(y + margin, 0, th - 1);
    x = std::clamp<Index>(x + margin, 0, tw - 1);
    return tex[static_cast<std::size_t>(y * tw + x)];
  };
  auto fg = [&](Index y, Index x, Index ch) { return static_cast<T>(fg_rgb[ch] + texel(y, x)); };
  auto bg = [&](Index y, Index x, Index ch) { return static_cast<T>(bg_rgb[ch] + texel(y, x)); };
  return render<T>(ny, nx, a, disparity, region, fg, bg, mask);
}

template <typename T>
LightField4D<T> parallax_scene(Index ny, Index nx, Index a, Index disparity, RngStream& rng, Image<T>* mask) {
  const Region region = random_region(ny, nx, rng);
  const Index margin = disparity * a;
  const Index th = ny + 2 * margin, tw = nx + 2 * margin;
  std::vector<double> tex(static_cast<std::size_t>(th * tw * 3));
  for (auto& t : tex) t = rng.uniform();
  auto texture = [&](Index y, Index x, Index ch) {
    y = std::clamp<Index>(y + margin, 0, th - 1);
    x = std::clamp<Index>(x + margin, 0, tw - 1);
    return static_cast<T>(tex[static_cast<std::size_t>((y * tw + x) * 3 + ch)]);
  };
  return render<T>(ny, nx, a, disparity, region, texture, texture, mask);
}

template LightField4D<float> rect_scene(Index, Index, Index, Index, RngStream&, Image<float>*);
template LightField4D<double> rect_scene(Index, Index, Index, Index, RngStream&, Image<double>*);
template LightField4D<float> parallax_scene(Index, Index, Index, Index, RngStream&, Image<float>*);
template LightField4D<double> parallax_scene(Index, Index, Index, Index, RngStream&, Image<double>*);

}  // namespace lfsal
