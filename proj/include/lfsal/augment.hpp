#ifndef LFSAL_AUGMENT_HPP
#define LFSAL_AUGMENT_HPP

#include <optional>
#include <string>
#include <vector>

#include "lfsal/lightfield.hpp"
#include "lfsal/rng.hpp"

namespace lfsal {

/// A micro-lens array with its ground truth at central-view resolution.
template <typename T>
struct Sample {
  MicroLensArray<T> array;
  Image<T> mask;  // N_y x N_x, one channel, values {0,1}
};

/// Checks mask dims against the array and that mask values are binary.
template <typename T>
void validate_sample(const Sample<T>& s);

struct CropSize {
  Index width = 0;
  Index height = 0;
};

struct AugmentationSpec {
  std::vector<int> rotations{0, 90, 180, 270};
  std::vector<FlipAxis> flips{FlipAxis::horizontal, FlipAxis::vertical};
  CropSize crop_size{3519, 2907};
  Index crop_count = 2;
  std::vector<double> brightness_factors{1.5, 0.6};
  std::optional<double> chroma_contrast_factor = 1.7;
  std::optional<double> noise_variance = 0.01;
  Index expected_count = 48;

  /// Crop size scaled from the 3519x2907-of-4860x3375 ratio onto an array of
  /// the given size, snapped down to the A grid.
  static AugmentationSpec scaled_to(Index width, Index height, Index angular_res);
  /// Only the identity variant.
  static AugmentationSpec identity();

  void validate(Index angular_res) const;
};

struct Photometric {
  double brightness = 1.0;
  double chroma = 1.0;
  double contrast = 1.0;
  bool is_identity() const { return brightness == 1.0 && chroma == 1.0 && contrast == 1.0; }
};

enum class GeometricKind { rotate, flip, crop };

struct VariantRecipe {
  GeometricKind kind = GeometricKind::rotate;
  int degrees = 0;                        // rotate
  FlipAxis axis = FlipAxis::horizontal;   // flip
  Index crop_slot = 0;                    // crop
  Photometric photometric;
  bool noisy = false;

  std::string describe() const;
};

/// 4 rotations x {identity, each brightness factor, chroma&contrast}, then
/// every flip and crop x {identity, first brightness factor}; the whole list
/// is repeated with additive noise when a noise variance is set.
std::vector<VariantRecipe> plan_variants(const AugmentationSpec& spec);

/// Rotation is counter-clockwise; k must be a multiple of 90.
template <typename T>
Sample<T> rotate_sample(const Sample<T>& s, int degrees);

template <typename T>
Sample<T> flip_sample(const Sample<T>& s, FlipAxis axis);

/// origin and size in array pixels, all multiples of A.
template <typename T>
Sample<T> crop_sample(const Sample<T>& s, Index x0, Index y0, CropSize size);

/// A-aligned crop origin drawn uniformly from the valid range.
std::pair<Index, Index> draw_crop_origin(Index width, Index height, Index angular_res, CropSize size,
                                         RngStream& rng);

/// brightness scaling, then mean-centred contrast per channel, then HSV
/// saturation scaling; each stage clamps to [0, 1]. The mask is untouched.
template <typename T>
Sample<T> photometric(const Sample<T>& s, double brightness, double chroma, double contrast);

template <typename T>
Sample<T> add_noise(const Sample<T>& s, double variance, RngStream& rng);

/// One variant. `rng` is the per-sample crop stream; crop origins come from
/// rng.fork(slot) and noise from a noise stream derived per variant index.
template <typename T>
Sample<T> make_variant(const Sample<T>& s, const AugmentationSpec& spec, const VariantRecipe& recipe,
                       Index variant_index, const RngStream& rng);

template <typename T>
std::vector<Sample<T>> enumerate_variants(const Sample<T>& s, const AugmentationSpec& spec,
                                          const RngStream& rng);

/// Lazily augmented view of a base set: entry i is variant (i mod V) of base
/// sample (i div V), V = |plan_variants(spec)|.
template <typename T>
class AugmentedDataset {
 public:
  AugmentedDataset(std::vector<Sample<T>> base, AugmentationSpec spec, std::uint64_t seed);

  Index size() const { return static_cast<Index>(base_.size()) * variants_per_sample(); }
  Index variants_per_sample() const { return static_cast<Index>(plan_.size()); }
  Sample<T> at(Index i) const;
  const std::vector<Sample<T>>& base() const { return base_; }

 private:
  std::vector<Sample<T>> base_;
  AugmentationSpec spec_;
  std::vector<VariantRecipe> plan_;
  std::uint64_t seed_;
};

// HSV helpers, h in [0, 6).
void rgb_to_hsv(double r, double g, double b, double& h, double& s, double& v);
void hsv_to_rgb(double h, double s, double v, double& r, double& g, double& b);

}  // namespace lfsal

#endif  // LFSAL_AUGMENT_HPP
