#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "misme/error.hpp"
#include "misme/image.hpp"

namespace misme::patch {

// Axis-aligned box in pixel coordinates, half-open [min, max).
struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;
  double confidence = 1.0;

  void validate() const {
    if (!(x_min < x_max && y_min < y_max)) {
      throw ContractError("bounding box must satisfy x_min < x_max and y_min < y_max, got " +
                          describe());
    }
  }

  double area() const { return (x_max - x_min) * (y_max - y_min); }

  std::string describe() const {
    return "[" + std::to_string(x_min) + ", " + std::to_string(y_min) + ", " +
           std::to_string(x_max) + ", " + std::to_string(y_max) + "]";
  }
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  a.validate();
  b.validate();
  const double ix = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double iy = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  return inter / (a.area() + b.area() - inter);
}

// Round half-up to integer pixel indices.
inline long round_half_up(double v) { return static_cast<long>(std::floor(v + 0.5)); }

// Crops the box from the image. Returns nullopt (a skip, not an error) when
// the detection confidence is below the threshold. Boxes that leave the image
// after rounding are an error: silent clipping would corrupt patch statistics.
inline std::optional<img::Image> crop_patch(const img::Image& image, const BoundingBox& box,
                                            double min_confidence = 0.5) {
  box.validate();
  if (box.confidence < min_confidence) return std::nullopt;

  const long x0 = round_half_up(box.x_min);
  const long y0 = round_half_up(box.y_min);
  const long x1 = round_half_up(box.x_max);
  const long y1 = round_half_up(box.y_max);
  if (x0 < 0 || y0 < 0 || x1 > static_cast<long>(image.width) ||
      y1 > static_cast<long>(image.height) || x0 >= x1 || y0 >= y1) {
    throw BoundsError("box " + box.describe() + " outside image " + std::to_string(image.width) +
                      "x" + std::to_string(image.height));
  }

  img::Image out(static_cast<std::size_t>(x1 - x0), static_cast<std::size_t>(y1 - y0));
  for (long y = y0; y < y1; ++y) {
    for (long x = x0; x < x1; ++x) {
      for (std::size_t c = 0; c < 3; ++c) {
        out.at(y - y0, x - x0, c) = image.at(y, x, c);
      }
    }
  }
  return out;
}

}  // namespace misme::patch
