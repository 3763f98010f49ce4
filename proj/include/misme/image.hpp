#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "misme/error.hpp"
#include "misme/tensor.hpp"

namespace misme::img {

// 8-bit interleaved RGB image.
struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // height * width * 3

  Image() = default;
  Image(std::size_t w, std::size_t h) : width(w), height(h), pixels(w * h * 3, 0) {}

  std::uint8_t& at(std::size_t y, std::size_t x, std::size_t c) {
    return pixels[(y * width + x) * 3 + c];
  }
  std::uint8_t at(std::size_t y, std::size_t x, std::size_t c) const {
    return pixels[(y * width + x) * 3 + c];
  }
};

// [H, W, 3] tensor in [0, 1] <-> 8-bit image.
inline nn::Tensor to_unit_tensor(const Image& im) {
  nn::Tensor t({im.height, im.width, 3});
  for (std::size_t i = 0; i < im.pixels.size(); ++i) {
    t[i] = static_cast<double>(im.pixels[i]) / 255.0;
  }
  return t;
}

inline Image from_unit_tensor(const nn::Tensor& t) {
  if (t.rank() != 3 || t.dim(2) != 3) {
    throw DimensionError("from_unit_tensor: expected [H, W, 3], got " + nn::shape_to_string(t.shape()));
  }
  Image im(t.dim(1), t.dim(0));
  for (std::size_t i = 0; i < im.pixels.size(); ++i) {
    double v = t[i];
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    im.pixels[i] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
  }
  return im;
}

// Bilinear resample to a new resolution; used to bring variable-sized crops
// to the model's fixed input size.
inline Image resize_bilinear(const Image& src, std::size_t out_w, std::size_t out_h) {
  if (out_w == 0 || out_h == 0) throw DimensionError("resize_bilinear: zero target size");
  if (src.width == 0 || src.height == 0) throw DimensionError("resize_bilinear: empty source");
  Image out(out_w, out_h);
  const double sx = static_cast<double>(src.width) / static_cast<double>(out_w);
  const double sy = static_cast<double>(src.height) / static_cast<double>(out_h);
  for (std::size_t y = 0; y < out_h; ++y) {
    const double fy = (static_cast<double>(y) + 0.5) * sy - 0.5;
    const double cy = std::min(std::max(fy, 0.0), static_cast<double>(src.height - 1));
    const std::size_t y0 = static_cast<std::size_t>(cy);
    const std::size_t y1 = std::min(y0 + 1, src.height - 1);
    const double wy = cy - static_cast<double>(y0);
    for (std::size_t x = 0; x < out_w; ++x) {
      const double fx = (static_cast<double>(x) + 0.5) * sx - 0.5;
      const double cx = std::min(std::max(fx, 0.0), static_cast<double>(src.width - 1));
      const std::size_t x0 = static_cast<std::size_t>(cx);
      const std::size_t x1 = std::min(x0 + 1, src.width - 1);
      const double wx = cx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double top = (1.0 - wx) * src.at(y0, x0, c) + wx * src.at(y0, x1, c);
        const double bottom = (1.0 - wx) * src.at(y1, x0, c) + wx * src.at(y1, x1, c);
        out.at(y, x, c) = static_cast<std::uint8_t>((1.0 - wy) * top + wy * bottom + 0.5);
      }
    }
  }
  return out;
}

// --- PPM (P6, binary, maxval 255) ---

inline void write_ppm(const std::filesystem::path& path, const Image& im) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write image: " + path.string());
  out << "P6\n" << im.width << " " << im.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(im.pixels.data()),
            static_cast<std::streamsize>(im.pixels.size()));
  if (!out) throw IoError("image write failed: " + path.string());
}

inline Image read_ppm_stream(std::istream& in, const std::string& origin) {
  std::string magic;
  in >> magic;
  if (magic != "P6") throw ParseError(origin + ": not a P6 PPM file");
  auto next_int = [&]() {
    // Skip whitespace and '#' comments.
    for (;;) {
      const int c = in.peek();
      if (c == EOF) break;
      if (c == '#') {
        std::string line;
        std::getline(in, line);
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        in.get();
      } else {
        break;
      }
    }
    long v = -1;
    in >> v;
    if (!in || v < 0) throw ParseError(origin + ": malformed PPM header");
    return static_cast<std::size_t>(v);
  };
  const std::size_t w = next_int();
  const std::size_t h = next_int();
  const std::size_t maxval = next_int();
  if (maxval != 255) throw ParseError(origin + ": only maxval 255 PPM supported");
  in.get();  // single whitespace before binary data
  Image im(w, h);
  in.read(reinterpret_cast<char*>(im.pixels.data()), static_cast<std::streamsize>(im.pixels.size()));
  if (!in) throw ParseError(origin + ": truncated PPM pixel data");
  return im;
}

inline Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image: " + path.string());
  return read_ppm_stream(in, path.string());
}

}  // namespace misme::img
