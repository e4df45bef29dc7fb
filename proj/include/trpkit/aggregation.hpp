#pragma once

// Parameter-free mask-guided aggregation of visual prompts.
//
// Image features X (C x N x H x W) are pooled under prompt masks
// M (Q x N x H x W):  V[q][n][c] = sum_{h,w} X[c][n][h][w] * M[q][n][h][w],
// summed h-major then w. V is then offset by a cosine positional encoding.

#include <array>
#include <cstddef>
#include <variant>
#include <vector>

#include "trpkit/geometry.hpp"

namespace trpkit {

/// How N patches of patch_h x patch_w cells tile the image: a
/// patch_rows x patch_cols arrangement, row-major.
struct GridLayout {
  std::size_t patch_rows = 3;
  std::size_t patch_cols = 3;
  std::size_t patch_h = 8;
  std::size_t patch_w = 8;

  std::size_t patches() const { return patch_rows * patch_cols; }
  std::size_t image_h() const { return patch_rows * patch_h; }
  std::size_t image_w() const { return patch_cols * patch_w; }
};

struct FeatureGrid {
  std::size_t channels = 0, patches = 0, patch_h = 0, patch_w = 0;
  std::vector<double> data;  // C x N x H x W

  FeatureGrid() = default;
  FeatureGrid(std::size_t c, std::size_t n, std::size_t h, std::size_t w, double fill = 0.0)
      : channels(c), patches(n), patch_h(h), patch_w(w), data(c * n * h * w, fill) {}

  double& at(std::size_t c, std::size_t n, std::size_t h, std::size_t w) {
    return data[((c * patches + n) * patch_h + h) * patch_w + w];
  }
  double at(std::size_t c, std::size_t n, std::size_t h, std::size_t w) const {
    return data[((c * patches + n) * patch_h + h) * patch_w + w];
  }
};

struct PromptMask {
  std::size_t queries = 0, patches = 0, patch_h = 0, patch_w = 0;
  std::vector<double> data;  // Q x N x H x W, entries in [0, 1]

  PromptMask() = default;
  PromptMask(std::size_t q, std::size_t n, std::size_t h, std::size_t w, double fill = 0.0)
      : queries(q), patches(n), patch_h(h), patch_w(w), data(q * n * h * w, fill) {}

  double& at(std::size_t q, std::size_t n, std::size_t h, std::size_t w) {
    return data[((q * patches + n) * patch_h + h) * patch_w + w];
  }
  double at(std::size_t q, std::size_t n, std::size_t h, std::size_t w) const {
    return data[((q * patches + n) * patch_h + h) * patch_w + w];
  }
};

/// Q x N x C.
struct QueryFeatures {
  std::size_t queries = 0, patches = 0, channels = 0;
  std::vector<double> data;

  QueryFeatures() = default;
  QueryFeatures(std::size_t q, std::size_t n, std::size_t c, double fill = 0.0)
      : queries(q), patches(n), channels(c), data(q * n * c, fill) {}

  double& at(std::size_t q, std::size_t n, std::size_t c) { return data[(q * patches + n) * channels + c]; }
  double at(std::size_t q, std::size_t n, std::size_t c) const { return data[(q * patches + n) * channels + c]; }
};

struct PointPrompt {
  double x = 0, y = 0;
};
struct ScribblePrompt {
  std::vector<std::array<double, 2>> points;  // (x, y) polyline
};
using VisualPrompt = std::variant<PointPrompt, Box, ScribblePrompt, BinaryMask>;

struct RasterConfig {
  std::size_t point_radius = 1;  // a point covers a (2r+1)^2 neighbourhood
};

/// Rasterizes a prompt onto the layout's full image grid, then splits it
/// into patches and repeats it for each of `queries` slots.
/// Throws Error{EmptyPrompt} when nothing is drawn.
PromptMask prompt_to_mask(const VisualPrompt& prompt, const GridLayout& layout, std::size_t queries,
                          const RasterConfig& cfg = {});

/// Full-image rasterization (image_h x image_w) before partitioning.
BinaryMask rasterize_prompt(const VisualPrompt& prompt, std::size_t height, std::size_t width,
                            const RasterConfig& cfg = {});

/// Splits a full-image mask into layout patches, repeated across queries.
PromptMask partition_mask(const BinaryMask& full, const GridLayout& layout, std::size_t queries);

/// Throws Error{DimensionMismatch} unless N, H and W agree.
QueryFeatures aggregate(const FeatureGrid& x, const PromptMask& m);

struct PeConfig {
  double temperature = 10000.0;
  double alpha = 1.0;
};

/// N x C row-major table of cos(n / s^(2c/C)).
std::vector<double> positional_encoding(std::size_t patches, std::size_t channels, const PeConfig& cfg = {});

QueryFeatures fuse(const QueryFeatures& v, const PeConfig& cfg = {});

}  // namespace trpkit
