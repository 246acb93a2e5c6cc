#ifndef LFSAL_IMAGE_HPP
#define LFSAL_IMAGE_HPP

#include <Eigen/Core>

#include <string>

#include "lfsal/errors.hpp"
#include "lfsal/tensor.hpp"

namespace lfsal {

/// Interleaved H x W x C raster, row-major, values normally in [0, 1].
template <typename T>
class Image {
 public:
  using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

  Image() = default;
  Image(Index height, Index width, Index channels, T fill = T(0))
      : height_(height), width_(width), channels_(channels),
        data_(Vector::Constant(height * width * channels, fill)) {
    if (height < 0 || width < 0 || channels < 1) {
      throw ConfigError("image: invalid dims " + std::to_string(height) + "x" + std::to_string(width) +
                        "x" + std::to_string(channels));
    }
  }

  Index height() const noexcept { return height_; }
  Index width() const noexcept { return width_; }
  Index channels() const noexcept { return channels_; }
  Index size() const noexcept { return data_.size(); }

  T& operator()(Index y, Index x, Index c = 0) { return data_[(y * width_ + x) * channels_ + c]; }
  T operator()(Index y, Index x, Index c = 0) const { return data_[(y * width_ + x) * channels_ + c]; }

  Vector& values() noexcept { return data_; }
  const Vector& values() const noexcept { return data_; }

  bool same_dims(const Image& o) const {
    return height_ == o.height_ && width_ == o.width_ && channels_ == o.channels_;
  }

  template <typename U>
  Image<U> cast() const {
    Image<U> out(height_, width_, channels_);
    out.values() = data_.template cast<U>();
    return out;
  }

  /// Planar [C,H,W] tensor copy.
  Tensor<T> to_chw() const {
    Tensor<T> t({channels_, height_, width_});
    for (Index y = 0; y < height_; ++y)
      for (Index x = 0; x < width_; ++x)
        for (Index c = 0; c < channels_; ++c) t(c, y, x) = (*this)(y, x, c);
    return t;
  }

  static Image from_chw(const Tensor<T>& t) {
    require_rank(t, 3, "Image::from_chw");
    Image img(t.dim(1), t.dim(2), t.dim(0));
    for (Index y = 0; y < img.height_; ++y)
      for (Index x = 0; x < img.width_; ++x)
        for (Index c = 0; c < img.channels_; ++c) img(y, x, c) = t(c, y, x);
    return img;
  }

  friend bool operator==(const Image& a, const Image& b) { return a.same_dims(b) && a.data_ == b.data_; }

 private:
  Index height_ = 0;
  Index width_ = 0;
  Index channels_ = 1;
  Vector data_;
};

enum class FlipAxis { horizontal, vertical };

/// Counter-clockwise rotation by quarter_turns * 90 degrees:
/// one turn maps out(i, j) = in(j, W - 1 - i).
template <typename T>
Image<T> rotate_image(const Image<T>& in, int quarter_turns) {
  const int k = ((quarter_turns % 4) + 4) % 4;
  if (k == 0) return in;
  const Index h = in.height(), w = in.width(), c = in.channels();
  const bool swap = (k % 2) == 1;
  Image<T> out(swap ? w : h, swap ? h : w, c);
  for (Index i = 0; i < out.height(); ++i) {
    for (Index j = 0; j < out.width(); ++j) {
      Index sy = 0, sx = 0;
      if (k == 1) { sy = j; sx = w - 1 - i; }
      else if (k == 2) { sy = h - 1 - i; sx = w - 1 - j; }
      else { sy = h - 1 - j; sx = i; }
      for (Index ch = 0; ch < c; ++ch) out(i, j, ch) = in(sy, sx, ch);
    }
  }
  return out;
}

/// Horizontal mirrors columns, vertical mirrors rows.
template <typename T>
Image<T> flip_image(const Image<T>& in, FlipAxis axis) {
  Image<T> out(in.height(), in.width(), in.channels());
  for (Index y = 0; y < in.height(); ++y) {
    for (Index x = 0; x < in.width(); ++x) {
      const Index sy = axis == FlipAxis::vertical ? in.height() - 1 - y : y;
      const Index sx = axis == FlipAxis::horizontal ? in.width() - 1 - x : x;
      for (Index c = 0; c < in.channels(); ++c) out(y, x, c) = in(sy, sx, c);
    }
  }
  return out;
}

template <typename T>
Image<T> crop_image(const Image<T>& in, Index x0, Index y0, Index w, Index h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > in.width() || y0 + h > in.height()) {
    throw BoundsError("crop " + std::to_string(w) + "x" + std::to_string(h) + " at (" + std::to_string(x0) +
                      "," + std::to_string(y0) + ") exceeds image " + std::to_string(in.width()) + "x" +
                      std::to_string(in.height()));
  }
  Image<T> out(h, w, in.channels());
  for (Index y = 0; y < h; ++y)
    for (Index x = 0; x < w; ++x)
      for (Index c = 0; c < in.channels(); ++c) out(y, x, c) = in(y0 + y, x0 + x, c);
  return out;
}

}  // namespace lfsal

#endif  // LFSAL_IMAGE_HPP
