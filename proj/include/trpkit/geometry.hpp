#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace trpkit {

/// Axis-aligned box in normalized corner form. Zero-area boxes are allowed.
struct Box {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;

  bool valid() const;
  double area() const { return (x1 - x0) * (y1 - y0); }

  /// Throws Error{InvalidBox} unless 0 <= x0 <= x1 <= 1 and 0 <= y0 <= y1 <= 1.
  static Box checked(double x0, double y0, double x1, double y1);

  friend bool operator==(const Box&, const Box&) = default;
};

/// Row-major bit grid.
struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::uint8_t> data;  // 0 or 1

  BinaryMask() = default;
  BinaryMask(std::size_t h, std::size_t w, std::uint8_t fill = 0) : height(h), width(w), data(h * w, fill) {}

  std::uint8_t at(std::size_t r, std::size_t c) const { return data[r * width + c]; }
  std::uint8_t& at(std::size_t r, std::size_t c) { return data[r * width + c]; }
  std::size_t count() const;

  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

/// Uncompressed COCO-style run lengths over the row-major data, starting
/// with a (possibly empty) run of zeros.
struct Rle {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::size_t> counts;

  friend bool operator==(const Rle&, const Rle&) = default;
};

/// Sum of absolute differences in (cx, cy, w, h) form.
double box_l1(const Box& a, const Box& b);
double box_iou(const Box& a, const Box& b);
/// Generalized IoU. Two coincident zero-area boxes score 1.
double box_giou(const Box& a, const Box& b);

/// Both return 1 for two empty masks. Throw Error{DimensionMismatch}.
double mask_dice(const BinaryMask& a, const BinaryMask& b);
double mask_iou(const BinaryMask& a, const BinaryMask& b);

struct OverlapCounts {
  std::size_t intersection = 0;
  std::size_t uni = 0;
};
OverlapCounts mask_overlap(const BinaryMask& a, const BinaryMask& b);

Rle rle_encode(const BinaryMask& m);
/// Throws Error{BadRunLength} when the counts do not cover height x width.
BinaryMask rle_decode(const Rle& r);

}  // namespace trpkit
