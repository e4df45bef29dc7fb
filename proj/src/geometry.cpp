#include "trpkit/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "trpkit/error.hpp"

namespace trpkit {

namespace {

void require_same_shape(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw Error(ErrorKind::DimensionMismatch, std::to_string(a.height) + "x" + std::to_string(a.width) + " vs " +
                                                  std::to_string(b.height) + "x" + std::to_string(b.width));
  }
}

}  // namespace

bool Box::valid() const { return 0.0 <= x0 && x0 <= x1 && x1 <= 1.0 && 0.0 <= y0 && y0 <= y1 && y1 <= 1.0; }

Box Box::checked(double x0, double y0, double x1, double y1) {
  Box b{x0, y0, x1, y1};
  if (!b.valid()) {
    throw Error(ErrorKind::InvalidBox, "[" + std::to_string(x0) + ", " + std::to_string(y0) + ", " +
                                           std::to_string(x1) + ", " + std::to_string(y1) + "]");
  }
  return b;
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

double box_l1(const Box& a, const Box& b) {
  const double acx = (a.x0 + a.x1) / 2, acy = (a.y0 + a.y1) / 2;
  const double bcx = (b.x0 + b.x1) / 2, bcy = (b.y0 + b.y1) / 2;
  return std::abs(acx - bcx) + std::abs(acy - bcy) + std::abs((a.x1 - a.x0) - (b.x1 - b.x0)) +
         std::abs((a.y1 - a.y0) - (b.y1 - b.y0));
}

namespace {

struct Overlap {
  double inter;
  double uni;
};

Overlap box_overlap(const Box& a, const Box& b) {
  const double iw = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double ih = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = iw * ih;
  return {inter, a.area() + b.area() - inter};
}

}  // namespace

double box_iou(const Box& a, const Box& b) {
  const auto [inter, uni] = box_overlap(a, b);
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return inter / uni;
}

double box_giou(const Box& a, const Box& b) {
  const auto [inter, uni] = box_overlap(a, b);
  if (uni <= 0.0 && a == b) return 1.0;
  const double iou = uni > 0.0 ? inter / uni : 0.0;
  const double hull = (std::max(a.x1, b.x1) - std::min(a.x0, b.x0)) * (std::max(a.y1, b.y1) - std::min(a.y0, b.y0));
  if (hull <= 0.0) return iou;
  return iou - std::max(0.0, hull - uni) / hull;
}

OverlapCounts mask_overlap(const BinaryMask& a, const BinaryMask& b) {
  require_same_shape(a, b);
  OverlapCounts c;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    c.intersection += (a.data[i] & b.data[i]);
    c.uni += (a.data[i] | b.data[i]);
  }
  return c;
}

double mask_dice(const BinaryMask& a, const BinaryMask& b) {
  const auto c = mask_overlap(a, b);
  const std::size_t total = a.count() + b.count();
  if (total == 0) return 1.0;
  return 2.0 * static_cast<double>(c.intersection) / static_cast<double>(total);
}

double mask_iou(const BinaryMask& a, const BinaryMask& b) {
  const auto c = mask_overlap(a, b);
  if (c.uni == 0) return 1.0;
  return static_cast<double>(c.intersection) / static_cast<double>(c.uni);
}

Rle rle_encode(const BinaryMask& m) {
  Rle r{m.height, m.width, {}};
  std::uint8_t current = 0;
  std::size_t run = 0;
  for (auto bit : m.data) {
    if (bit != current) {
      r.counts.push_back(run);
      current = bit;
      run = 0;
    }
    ++run;
  }
  r.counts.push_back(run);
  return r;
}

BinaryMask rle_decode(const Rle& r) {
  const std::size_t total = std::accumulate(r.counts.begin(), r.counts.end(), std::size_t{0});
  if (total != r.height * r.width) {
    throw Error(ErrorKind::BadRunLength,
                "runs cover " + std::to_string(total) + " cells, mask has " + std::to_string(r.height * r.width));
  }
  BinaryMask m(r.height, r.width);
  std::size_t pos = 0;
  std::uint8_t bit = 0;
  for (auto run : r.counts) {
    std::fill_n(m.data.begin() + static_cast<std::ptrdiff_t>(pos), run, bit);
    pos += run;
    bit ^= 1;
  }
  return m;
}

}  // namespace trpkit
