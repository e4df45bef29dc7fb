#include "trpkit/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "trpkit/error.hpp"

namespace trpkit {

namespace {

std::size_t cell_of(double coord, std::size_t cells) {
  const auto c = static_cast<long long>(std::floor(coord * static_cast<double>(cells)));
  return static_cast<std::size_t>(std::clamp<long long>(c, 0, static_cast<long long>(cells) - 1));
}

void draw_line(BinaryMask& m, long long r0, long long c0, long long r1, long long c1) {
  const long long dr = std::llabs(r1 - r0);
  const long long dc = std::llabs(c1 - c0);
  const long long sr = r0 < r1 ? 1 : -1;
  const long long sc = c0 < c1 ? 1 : -1;
  long long err = dc - dr;
  for (;;) {
    m.at(static_cast<std::size_t>(r0), static_cast<std::size_t>(c0)) = 1;
    if (r0 == r1 && c0 == c1) break;
    const long long e2 = 2 * err;
    if (e2 > -dr) {
      err -= dr;
      c0 += sc;
    }
    if (e2 < dc) {
      err += dc;
      r0 += sr;
    }
  }
}

struct Rasterizer {
  std::size_t height;
  std::size_t width;
  const RasterConfig& cfg;

  BinaryMask operator()(const PointPrompt& p) const {
    BinaryMask m(height, width);
    const auto r = static_cast<long long>(cell_of(p.y, height));
    const auto c = static_cast<long long>(cell_of(p.x, width));
    const auto rad = static_cast<long long>(cfg.point_radius);
    for (long long i = r - rad; i <= r + rad; ++i) {
      for (long long j = c - rad; j <= c + rad; ++j) {
        if (i >= 0 && j >= 0 && i < static_cast<long long>(height) && j < static_cast<long long>(width)) {
          m.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = 1;
        }
      }
    }
    return m;
  }

  BinaryMask operator()(const Box& b) const {
    BinaryMask m(height, width);
    auto span = [](double lo, double hi, std::size_t cells) {
      const std::size_t first = cell_of(lo, cells);
      auto last = static_cast<std::size_t>(std::ceil(hi * static_cast<double>(cells)));
      last = std::clamp(last, first + 1, cells);
      return std::pair{first, last};
    };
    const auto [r0, r1] = span(b.y0, b.y1, height);
    const auto [c0, c1] = span(b.x0, b.x1, width);
    for (std::size_t r = r0; r < r1; ++r) {
      for (std::size_t c = c0; c < c1; ++c) m.at(r, c) = 1;
    }
    return m;
  }

  BinaryMask operator()(const ScribblePrompt& s) const {
    BinaryMask m(height, width);
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const auto& a = s.points[i];
      const auto& b = i + 1 < s.points.size() ? s.points[i + 1] : a;
      draw_line(m, static_cast<long long>(cell_of(a[1], height)), static_cast<long long>(cell_of(a[0], width)),
                static_cast<long long>(cell_of(b[1], height)), static_cast<long long>(cell_of(b[0], width)));
    }
    return m;
  }

  BinaryMask operator()(const BinaryMask& src) const {
    BinaryMask m(height, width);
    if (src.height == 0 || src.width == 0) return m;
    for (std::size_t r = 0; r < height; ++r) {
      const std::size_t sr = (2 * r + 1) * src.height / (2 * height);
      for (std::size_t c = 0; c < width; ++c) {
        const std::size_t sc = (2 * c + 1) * src.width / (2 * width);
        m.at(r, c) = src.at(sr, sc);
      }
    }
    return m;
  }
};

}  // namespace

BinaryMask rasterize_prompt(const VisualPrompt& prompt, std::size_t height, std::size_t width,
                            const RasterConfig& cfg) {
  auto m = std::visit(Rasterizer{height, width, cfg}, prompt);
  if (m.count() == 0) throw Error(ErrorKind::EmptyPrompt, "prompt rasterizes to an empty mask");
  return m;
}

PromptMask partition_mask(const BinaryMask& full, const GridLayout& layout, std::size_t queries) {
  if (full.height != layout.image_h() || full.width != layout.image_w()) {
    throw Error(ErrorKind::DimensionMismatch, "mask does not cover the layout");
  }
  PromptMask out(queries, layout.patches(), layout.patch_h, layout.patch_w);
  for (std::size_t y = 0; y < full.height; ++y) {
    for (std::size_t x = 0; x < full.width; ++x) {
      const std::size_t n = (y / layout.patch_h) * layout.patch_cols + x / layout.patch_w;
      for (std::size_t q = 0; q < queries; ++q) {
        out.at(q, n, y % layout.patch_h, x % layout.patch_w) = full.at(y, x);
      }
    }
  }
  return out;
}

PromptMask prompt_to_mask(const VisualPrompt& prompt, const GridLayout& layout, std::size_t queries,
                          const RasterConfig& cfg) {
  return partition_mask(rasterize_prompt(prompt, layout.image_h(), layout.image_w(), cfg), layout, queries);
}

QueryFeatures aggregate(const FeatureGrid& x, const PromptMask& m) {
  if (x.patches != m.patches || x.patch_h != m.patch_h || x.patch_w != m.patch_w) {
    throw Error(ErrorKind::DimensionMismatch, "feature grid and prompt mask disagree on (N, H, W)");
  }
  QueryFeatures v(m.queries, x.patches, x.channels);
  for (std::size_t q = 0; q < m.queries; ++q) {
    for (std::size_t n = 0; n < x.patches; ++n) {
      for (std::size_t c = 0; c < x.channels; ++c) {
        double sum = 0.0;
        for (std::size_t h = 0; h < x.patch_h; ++h) {
          for (std::size_t w = 0; w < x.patch_w; ++w) sum += x.at(c, n, h, w) * m.at(q, n, h, w);
        }
        v.at(q, n, c) = sum;
      }
    }
  }
  return v;
}

std::vector<double> positional_encoding(std::size_t patches, std::size_t channels, const PeConfig& cfg) {
  std::vector<double> pe(patches * channels);
  for (std::size_t n = 0; n < patches; ++n) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double denom = std::pow(cfg.temperature, 2.0 * static_cast<double>(c) / static_cast<double>(channels));
      pe[n * channels + c] = std::cos(static_cast<double>(n) / denom);
    }
  }
  return pe;
}

QueryFeatures fuse(const QueryFeatures& v, const PeConfig& cfg) {
  const auto pe = positional_encoding(v.patches, v.channels, cfg);
  QueryFeatures out = v;
  for (std::size_t q = 0; q < v.queries; ++q) {
    for (std::size_t n = 0; n < v.patches; ++n) {
      for (std::size_t c = 0; c < v.channels; ++c) out.at(q, n, c) += cfg.alpha * pe[n * v.channels + c];
    }
  }
  return out;
}

}  // namespace trpkit
