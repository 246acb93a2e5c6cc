#include "lfsal/augment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lfsal {

template <typename T>
void validate_sample(const Sample<T>& s) {
  const Index a = s.array.angular_res;
  require_divisible(s.array.height(), s.array.width(), a);
  if (s.mask.height() != s.array.height() / a || s.mask.width() != s.array.width() / a ||
      s.mask.channels() != 1) {
    throw DataError("mask is " + std::to_string(s.mask.width()) + "x" + std::to_string(s.mask.height()) +
                    ", expected " + std::to_string(s.array.width() / a) + "x" +
                    std::to_string(s.array.height() / a));
  }
  for (Index i = 0; i < s.mask.size(); ++i) {
    const T m = s.mask.values()[i];
    if (m != T(0) && m != T(1)) throw DataError("mask value at " + std::to_string(i) + " is not 0 or 1");
  }
}

AugmentationSpec AugmentationSpec::scaled_to(Index width, Index height, Index a) {
  AugmentationSpec spec;
  auto snap = [a](double v) { return std::max<Index>(a, static_cast<Index>(std::floor(v / a + 1e-9)) * a); };
  spec.crop_size = {snap(static_cast<double>(width) * 3519.0 / 4860.0),
                    snap(static_cast<double>(height) * 2907.0 / 3375.0)};
  return spec;
}

AugmentationSpec AugmentationSpec::identity() {
  AugmentationSpec spec;
  spec.rotations = {0};
  spec.flips.clear();
  spec.crop_count = 0;
  spec.brightness_factors.clear();
  spec.chroma_contrast_factor.reset();
  spec.noise_variance.reset();
  spec.expected_count = 1;
  return spec;
}

void AugmentationSpec::validate(Index a) const {
  for (int r : rotations) {
    if (r % 90 != 0 || r < 0 || r >= 360) throw ConfigError("augment: rotation " + std::to_string(r) + " not in {0,90,180,270}");
  }
  if (crop_count > 0) {
    if (crop_size.width < a || crop_size.height < a || crop_size.width % a != 0 || crop_size.height % a != 0) {
      throw AlignmentError("augment: crop size " + std::to_string(crop_size.width) + "x" +
                           std::to_string(crop_size.height) + " is not a positive multiple of " + std::to_string(a));
    }
  }
  for (double b : brightness_factors) {
    if (!(b > 0.0)) throw ConfigError("augment: brightness factors must be positive");
  }
  if (chroma_contrast_factor && !(*chroma_contrast_factor > 0.0)) {
    throw ConfigError("augment: chroma/contrast factor must be positive");
  }
  if (noise_variance && !(*noise_variance >= 0.0)) throw ConfigError("augment: noise variance must be >= 0");
  const auto n = static_cast<Index>(plan_variants(*this).size());
  if (n != expected_count) {
    throw ConfigError("augment: spec enumerates " + std::to_string(n) + " variants but expected_count is " +
                      std::to_string(expected_count));
  }
}

std::string VariantRecipe::describe() const {
  std::ostringstream os;
  switch (kind) {
    case GeometricKind::rotate: os << "rot" << degrees; break;
    case GeometricKind::flip: os << (axis == FlipAxis::horizontal ? "hflip" : "vflip"); break;
    case GeometricKind::crop: os << "crop" << crop_slot; break;
  }
  if (photometric.brightness != 1.0) os << "+bright" << photometric.brightness;
  if (photometric.chroma != 1.0) os << "+chroma" << photometric.chroma;
  if (photometric.contrast != 1.0) os << "+contrast" << photometric.contrast;
  if (noisy) os << "+noise";
  return os.str();
}

std::vector<VariantRecipe> plan_variants(const AugmentationSpec& spec) {
  std::vector<Photometric> rotation_photo{Photometric{}};
  for (double b : spec.brightness_factors) rotation_photo.push_back({b, 1.0, 1.0});
  if (spec.chroma_contrast_factor) {
    rotation_photo.push_back({1.0, *spec.chroma_contrast_factor, *spec.chroma_contrast_factor});
  }
  std::vector<Photometric> other_photo{Photometric{}};
  if (!spec.brightness_factors.empty()) other_photo.push_back({spec.brightness_factors.front(), 1.0, 1.0});

  std::vector<VariantRecipe> plan;
  for (int r : spec.rotations) {
    for (const Photometric& p : rotation_photo) {
      VariantRecipe v;
      v.kind = GeometricKind::rotate;
      v.degrees = r;
      v.photometric = p;
      plan.push_back(v);
    }
  }
  for (FlipAxis axis : spec.flips) {
    for (const Photometric& p : other_photo) {
      VariantRecipe v;
      v.kind = GeometricKind::flip;
      v.axis = axis;
      v.photometric = p;
      plan.push_back(v);
    }
  }
  for (Index slot = 0; slot < spec.crop_count; ++slot) {
    for (const Photometric& p : other_photo) {
      VariantRecipe v;
      v.kind = GeometricKind::crop;
      v.crop_slot = slot;
      v.photometric = p;
      plan.push_back(v);
    }
  }
  if (spec.noise_variance) {
    const std::size_t clean = plan.size();
    for (std::size_t i = 0; i < clean; ++i) {
      VariantRecipe v = plan[i];
      v.noisy = true;
      plan.push_back(v);
    }
  }
  return plan;
}

template <typename T>
Sample<T> rotate_sample(const Sample<T>& s, int degrees) {
  if (degrees % 90 != 0) throw ConfigError("rotate_sample: " + std::to_string(degrees) + " is not a multiple of 90");
  const int k = degrees / 90;
  return {{rotate_image(s.array.pixels, k), s.array.angular_res}, rotate_image(s.mask, k)};
}

template <typename T>
Sample<T> flip_sample(const Sample<T>& s, FlipAxis axis) {
  return {{flip_image(s.array.pixels, axis), s.array.angular_res}, flip_image(s.mask, axis)};
}

template <typename T>
Sample<T> crop_sample(const Sample<T>& s, Index x0, Index y0, CropSize size) {
  const Index a = s.array.angular_res;
  auto check = [a](Index v, const char* what) {
    if (v % a != 0) {
      throw AlignmentError(std::string("crop_sample: ") + what + " " + std::to_string(v) +
                           " is not a multiple of " + std::to_string(a));
    }
  };
  check(x0, "origin x");
  check(y0, "origin y");
  check(size.width, "width");
  check(size.height, "height");
  return {{crop_image(s.array.pixels, x0, y0, size.width, size.height), a},
          crop_image(s.mask, x0 / a, y0 / a, size.width / a, size.height / a)};
}

std::pair<Index, Index> draw_crop_origin(Index width, Index height, Index a, CropSize size, RngStream& rng) {
  if (size.width > width || size.height > height) {
    throw BoundsError("crop " + std::to_string(size.width) + "x" + std::to_string(size.height) +
                      " larger than array " + std::to_string(width) + "x" + std::to_string(height));
  }
  const auto nx = static_cast<std::uint64_t>((width - size.width) / a + 1);
  const auto ny = static_cast<std::uint64_t>((height - size.height) / a + 1);
  const auto gx = static_cast<Index>(rng.below(nx));
  const auto gy = static_cast<Index>(rng.below(ny));
  return {gx * a, gy * a};
}

void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v) {
  const double mx = std::max({r, g, b}), mn = std::min({r, g, b});
  const double d = mx - mn;
  v = mx;
  s = mx > 0.0 ? d / mx : 0.0;
  if (d <= 0.0) {
    h = 0.0;
  } else if (mx == r) {
    h = std::fmod((g - b) / d + 6.0, 6.0);
  } else if (mx == g) {
    h = (b - r) / d + 2.0;
  } else {
    h = (r - g) / d + 4.0;
  }
}

void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b) {
  if (s <= 0.0) {
    r = g = b = v;
    return;
  }
  const double c = v * s;
  const double x = c * (1.0 - std::fabs(std::fmod(h, 2.0) - 1.0));
  const double m = v - c;
  double r1 = 0, g1 = 0, b1 = 0;
  switch (std::clamp(static_cast<int>(std::floor(h)), 0, 5)) {
    case 0: r1 = c; g1 = x; break;
    case 1: r1 = x; g1 = c; break;
    case 2: g1 = c; b1 = x; break;
    case 3: g1 = x; b1 = c; break;
    case 4: r1 = x; b1 = c; break;
    default: r1 = c; b1 = x; break;
  }
  r = r1 + m;
  g = g1 + m;
  b = b1 + m;
}

template <typename T>
Sample<T> photometric(const Sample<T>& s, double brightness, double chroma, double contrast) {
  if (!(brightness > 0.0 && chroma > 0.0 && contrast > 0.0)) {
    throw ConfigError("photometric: factors must be positive");
  }
  Sample<T> out = s;
  Image<T>& img = out.array.pixels;
  auto clamp01 = [](double v) { return static_cast<T>(std::clamp(v, 0.0, 1.0)); };
  if (brightness != 1.0) {
    for (Index i = 0; i < img.size(); ++i) img.values()[i] = clamp01(img.values()[i] * brightness);
  }
  if (contrast != 1.0) {
    const Index c = img.channels(), n = img.height() * img.width();
    for (Index ch = 0; ch < c; ++ch) {
      double mean = 0.0;
      for (Index p = 0; p < n; ++p) mean += img.values()[p * c + ch];
      mean /= static_cast<double>(n);
      for (Index p = 0; p < n; ++p) {
        T& v = img.values()[p * c + ch];
        v = clamp01((v - mean) * contrast + mean);
      }
    }
  }
  if (chroma != 1.0 && img.channels() == 3) {
    for (Index y = 0; y < img.height(); ++y) {
      for (Index x = 0; x < img.width(); ++x) {
        double h = 0, sat = 0, val = 0, r = 0, g = 0, b = 0;
        rgb_to_hsv(img(y, x, 0), img(y, x, 1), img(y, x, 2), h, sat, val);
        hsv_to_rgb(h, std::clamp(sat * chroma, 0.0, 1.0), val, r, g, b);
        img(y, x, 0) = clamp01(r);
        img(y, x, 1) = clamp01(g);
        img(y, x, 2) = clamp01(b);
      }
    }
  }
  return out;
}

template <typename T>
Sample<T> add_noise(const Sample<T>& s, double variance, RngStream& rng) {
  if (!(variance >= 0.0)) throw ConfigError("add_noise: variance must be >= 0");
  if (variance == 0.0) return s;
  Sample<T> out = s;
  const double sigma = std::sqrt(variance);
  for (Index i = 0; i < out.array.pixels.size(); ++i) {
    T& v = out.array.pixels.values()[i];
    v = static_cast<T>(std::clamp(static_cast<double>(v) + sigma * rng.normal(), 0.0, 1.0));
  }
  return out;
}

template <typename T>
Sample<T> make_variant(const Sample<T>& s, const AugmentationSpec& spec, const VariantRecipe& recipe,
                       Index variant_index, const RngStream& rng) {
  Sample<T> out;
  switch (recipe.kind) {
    case GeometricKind::rotate: out = rotate_sample(s, recipe.degrees); break;
    case GeometricKind::flip: out = flip_sample(s, recipe.axis); break;
    case GeometricKind::crop: {
      RngStream crop_rng = rng.fork(static_cast<std::uint64_t>(recipe.crop_slot));
      const auto [x0, y0] = draw_crop_origin(s.array.width(), s.array.height(), s.array.angular_res,
                                             spec.crop_size, crop_rng);
      out = crop_sample(s, x0, y0, spec.crop_size);
      break;
    }
  }
  if (!recipe.photometric.is_identity()) {
    out = photometric(out, recipe.photometric.brightness, recipe.photometric.chroma, recipe.photometric.contrast);
  }
  if (recipe.noisy && spec.noise_variance) {
    RngStream noise_rng = rng.derive(Stream::noise, static_cast<std::uint64_t>(variant_index));
    out = add_noise(out, *spec.noise_variance, noise_rng);
  }
  return out;
}

template <typename T>
std::vector<Sample<T>> enumerate_variants(const Sample<T>& s, const AugmentationSpec& spec, const RngStream& rng) {
  spec.validate(s.array.angular_res);
  const auto plan = plan_variants(spec);
  std::vector<Sample<T>> out;
  out.reserve(plan.size());
  for (std::size_t i = 0; i < plan.size(); ++i) {
    out.push_back(make_variant(s, spec, plan[i], static_cast<Index>(i), rng));
  }
  return out;
}

template <typename T>
AugmentedDataset<T>::AugmentedDataset(std::vector<Sample<T>> base, AugmentationSpec spec, std::uint64_t seed)
    : base_(std::move(base)), spec_(std::move(spec)), plan_(plan_variants(spec_)), seed_(seed) {
  for (const Sample<T>& s : base_) spec_.validate(s.array.angular_res);
}

template <typename T>
Sample<T> AugmentedDataset<T>::at(Index i) const {
  if (i < 0 || i >= size()) throw BoundsError("augmented index " + std::to_string(i) + " out of range");
  const Index v = variants_per_sample();
  const Index sample = i / v, variant = i % v;
  const RngStream rng(seed_, Stream::crop, static_cast<std::uint64_t>(sample));
  return make_variant(base_[static_cast<std::size_t>(sample)], spec_, plan_[static_cast<std::size_t>(variant)],
                      variant, rng);
}

#define LFSAL_INSTANTIATE_AUGMENT(T)                                                                       \
  template void validate_sample(const Sample<T>&);                                                         \
  template Sample<T> rotate_sample(const Sample<T>&, int);                                                 \
  template Sample<T> flip_sample(const Sample<T>&, FlipAxis);                                              \
  template Sample<T> crop_sample(const Sample<T>&, Index, Index, CropSize);                                \
  template Sample<T> photometric(const Sample<T>&, double, double, double);                                \
  template Sample<T> add_noise(const Sample<T>&, double, RngStream&);                                      \
  template Sample<T> make_variant(const Sample<T>&, const AugmentationSpec&, const VariantRecipe&, Index,   \
                                  const RngStream&);                                                       \
  template std::vector<Sample<T>> enumerate_variants(const Sample<T>&, const AugmentationSpec&,            \
                                                     const RngStream&);                                    \
  template class AugmentedDataset<T>;

LFSAL_INSTANTIATE_AUGMENT(float)
LFSAL_INSTANTIATE_AUGMENT(double)

}  // namespace lfsal
