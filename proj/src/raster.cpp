#include "lfsal/raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <string>

namespace lfsal {
namespace {

Index read_header_int(std::istream& in, const std::filesystem::path& path) {
  int ch = in.peek();
  while (ch != EOF) {
    if (ch == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(ch)) {
      in.get();
    } else {
      break;
    }
    ch = in.peek();
  }
  Index v = -1;
  if (!(in >> v) || v < 0) throw IoError(path.string() + ": malformed Netpbm header");
  return v;
}

}  // namespace

Image<std::uint8_t> read_netpbm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '6')) {
    throw IoError(path.string() + ": not a binary PGM/PPM file");
  }
  const Index channels = magic[1] == '6' ? 3 : 1;
  const Index width = read_header_int(in, path);
  const Index height = read_header_int(in, path);
  const Index maxval = read_header_int(in, path);
  if (maxval != 255) throw IoError(path.string() + ": only 8-bit rasters are supported");
  in.get();  // single whitespace before the raster
  Image<std::uint8_t> img(height, width, channels);
  in.read(reinterpret_cast<char*>(img.values().data()), static_cast<std::streamsize>(img.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.size())) throw IoError(path.string() + ": truncated raster");
  return img;
}

void write_netpbm(const std::filesystem::path& path, const Image<std::uint8_t>& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw IoError("Netpbm supports 1 or 3 channels, got " + std::to_string(img.channels()));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << (img.channels() == 3 ? "P6" : "P5") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(img.values().data()), static_cast<std::streamsize>(img.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

template <typename T>
Image<T> to_unit(const Image<std::uint8_t>& img) {
  Image<T> out(img.height(), img.width(), img.channels());
  out.values() = img.values().template cast<T>() / T(255);
  return out;
}

template <typename T>
Image<std::uint8_t> to_bytes(const Image<T>& img) {
  Image<std::uint8_t> out(img.height(), img.width(), img.channels());
  for (Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(static_cast<double>(img.values()[i]), 0.0, 1.0);
    out.values()[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
  }
  return out;
}

template <typename T>
Image<T> read_mask(const std::filesystem::path& path) {
  const Image<std::uint8_t> raw = read_netpbm(path);
  Image<T> mask(raw.height(), raw.width(), 1);
  for (Index y = 0; y < raw.height(); ++y)
    for (Index x = 0; x < raw.width(); ++x) mask(y, x) = raw(y, x, 0) > 127 ? T(1) : T(0);
  return mask;
}

template Image<float> to_unit(const Image<std::uint8_t>&);
template Image<double> to_unit(const Image<std::uint8_t>&);
template Image<std::uint8_t> to_bytes(const Image<float>&);
template Image<std::uint8_t> to_bytes(const Image<double>&);
template Image<float> read_mask(const std::filesystem::path&);
template Image<double> read_mask(const std::filesystem::path&);

}  // namespace lfsal
