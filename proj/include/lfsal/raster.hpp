#ifndef LFSAL_RASTER_HPP
#define LFSAL_RASTER_HPP

#include <cstdint>
#include <filesystem>

#include "lfsal/image.hpp"

namespace lfsal {

// Binary Netpbm I/O: PPM (P6) for RGB, PGM (P5) for grayscale, 8 bits per
// sample. Readers accept either magic.

Image<std::uint8_t> read_netpbm(const std::filesystem::path& path);
void write_netpbm(const std::filesystem::path& path, const Image<std::uint8_t>& img);

/// 8-bit value / 255.
template <typename T>
Image<T> to_unit(const Image<std::uint8_t>& img);

/// round(clamp(v, 0, 1) * 255).
template <typename T>
Image<std::uint8_t> to_bytes(const Image<T>& img);

template <typename T>
Image<T> read_image(const std::filesystem::path& path) {
  return to_unit<T>(read_netpbm(path));
}

template <typename T>
void write_image(const std::filesystem::path& path, const Image<T>& img) {
  write_netpbm(path, to_bytes(img));
}

/// Single-channel {0,1} mask; a pixel is salient iff its byte is > 127.
template <typename T>
Image<T> read_mask(const std::filesystem::path& path);

}  // namespace lfsal

#endif  // LFSAL_RASTER_HPP
