// Writes the bundled toy dataset: per-scene directories of view_{v}_{u}.ppm
// sub-aperture images plus one mask per scene.
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "lfsal/raster.hpp"
#include "lfsal/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"toy light-field dataset generator"};
  std::string out = "data/toy";
  lfsal::Index scenes = 10, views = 5, width = 32, height = 24;
  std::uint64_t seed = 7;
  app.add_option("--out", out);
  app.add_option("--scenes", scenes);
  app.add_option("--views", views);
  app.add_option("--width", width);
  app.add_option("--height", height);
  app.add_option("--seed", seed);
  CLI11_PARSE(app, argc, argv);

  try {
    const std::filesystem::path root(out);
    for (lfsal::Index s = 0; s < scenes; ++s) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%02lld", static_cast<long long>(s));
      lfsal::RngStream rng(seed, lfsal::Stream::weights, static_cast<std::uint64_t>(s));
      lfsal::Image<float> mask;
      const auto lf = lfsal::rect_scene<float>(height, width, views, 1, rng, &mask);
      for (lfsal::Index v = 0; v < views; ++v)
        for (lfsal::Index u = 0; u < views; ++u) {
          const auto view = lfsal::extract_subaperture(lf, u, v);
          lfsal::write_image(root / name / ("view_" + std::to_string(v) + "_" + std::to_string(u) + ".ppm"),
                             view.image);
        }
      lfsal::write_image(root / "masks" / (std::string(name) + ".pgm"), mask);
    }
  } catch (const std::exception& e) {
    std::cerr << "make_toy: " << e.what() << "\n";
    return 1;
  }
  std::cout << "wrote " << scenes << " scenes to " << out << "\n";
  return 0;
}
