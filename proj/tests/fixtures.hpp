#ifndef LFSAL_TESTS_FIXTURES_HPP
#define LFSAL_TESTS_FIXTURES_HPP

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "lfsal/augment.hpp"
#include "lfsal/dataset.hpp"
#include "lfsal/raster.hpp"
#include "lfsal/synthetic.hpp"
#include "lfsal/rng.hpp"

namespace fixture {

using lfsal::Index;

template <typename T>
lfsal::LightField4D<T> random_lightfield(Index a, Index ny, Index nx, Index c, lfsal::RngStream& rng) {
  lfsal::LightField4D<T> lf(a, a, ny, nx, c);
  for (Index i = 0; i < lf.values().size(); ++i) lf.values()[i] = static_cast<T>(rng.uniform());
  return lf;
}

/// Every sample encodes its own coordinates, so any permutation is traceable.
inline lfsal::LightField4D<double> indexed_lightfield(Index a, Index ny, Index nx) {
  lfsal::LightField4D<double> lf(a, a, ny, nx, 4);
  for (Index v = 0; v < a; ++v)
    for (Index u = 0; u < a; ++u)
      for (Index y = 0; y < ny; ++y)
        for (Index x = 0; x < nx; ++x) {
          lf(v, u, y, x, 0) = static_cast<double>(u);
          lf(v, u, y, x, 1) = static_cast<double>(v);
          lf(v, u, y, x, 2) = static_cast<double>(x);
          lf(v, u, y, x, 3) = static_cast<double>(y);
        }
  return lf;
}

template <typename T>
lfsal::Sample<T> random_sample(Index a, Index ny, Index nx, lfsal::RngStream& rng) {
  lfsal::Sample<T> s{lfsal::assemble_microlens_array(random_lightfield<T>(a, ny, nx, 3, rng)),
                     lfsal::Image<T>(ny, nx, 1)};
  for (Index i = 0; i < s.mask.size(); ++i) s.mask.values()[i] = rng.uniform() < 0.4 ? T(1) : T(0);
  s.mask(0, 0) = T(1);
  return s;
}

/// Fresh, empty directory under the build tree's temp area.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("lfsal_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Writes `n` synthetic (array, mask) pairs plus manifest.json into `dir`
/// and returns the manifest path.
inline std::filesystem::path write_dataset(const std::filesystem::path& dir, int n, Index a, Index ny, Index nx,
                                           std::uint64_t seed) {
  lfsal::Manifest m{a, {}};
  std::filesystem::create_directories(dir);
  for (int i = 0; i < n; ++i) {
    lfsal::RngStream rng(seed, lfsal::Stream::weights, static_cast<std::uint64_t>(i));
    lfsal::Image<float> mask;
    const auto lf = lfsal::rect_scene<float>(ny, nx, a, 1, rng, &mask);
    const std::string stem = "scene_" + std::to_string(i);
    lfsal::write_image(dir / (stem + ".ppm"), lfsal::assemble_microlens_array(lf).pixels);
    lfsal::write_image(dir / (stem + "_mask.pgm"), mask);
    m.entries.push_back({dir / (stem + ".ppm"), dir / (stem + "_mask.pgm")});
  }
  lfsal::save_manifest(dir / "manifest.json", m);
  return dir / "manifest.json";
}

inline std::string file_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixture

#endif  // LFSAL_TESTS_FIXTURES_HPP
