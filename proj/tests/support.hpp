#pragma once

// Random instance generators and naive reference implementations shared by
// the unit tests and the acceptance runner.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "trpkit/aggregation.hpp"
#include "trpkit/corpus.hpp"
#include "trpkit/error.hpp"
#include "trpkit/geometry.hpp"
#include "trpkit/matching.hpp"
#include "trpkit/metrics.hpp"
#include "trpkit/trp_grammar.hpp"

namespace testsupport {

using Rng = std::mt19937_64;

inline std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

inline double uniform_real(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool coin(Rng& rng, double p = 0.5) { return std::bernoulli_distribution(p)(rng); }

// ---- grammar ----

inline std::string random_words(Rng& rng) {
  static const char* words[] = {"dog",   "two men", "red",  "apple", "a",     "the",  "park", "glass",
                                "boat",  "in",      "with", "of",    "cap",   "UPPER", "x1",  "[VPT]",
                                "<image>", "[PAD]", "(aside)", "[note]", "é", "1, 2"};
  std::string out;
  const std::size_t n = uniform_int(rng, 1, 3);
  for (std::size_t i = 0; i < n; ++i) {
    if (i || coin(rng, 0.3)) out += coin(rng, 0.8) ? " " : "  ";
    out += words[uniform_int(rng, 0, std::size(words) - 1)];
  }
  if (coin(rng, 0.3)) out += " ";
  return out;
}

inline trpkit::PhraseNode random_phrase(Rng& rng, int depth) {
  trpkit::PhraseNode node;
  const std::size_t parts = uniform_int(rng, 1, 3);
  bool prev_text = false;
  bool has_text = false;
  for (std::size_t i = 0; i < parts; ++i) {
    if (depth < 2 && !prev_text && coin(rng, 0.3)) {
      node.children.emplace_back(trpkit::Indirect<trpkit::PhraseNode>(random_phrase(rng, depth + 1)));
      prev_text = false;
      has_text = true;
    } else if (!prev_text) {
      node.children.emplace_back(random_words(rng));
      prev_text = true;
      has_text = true;
    }
  }
  if (!has_text) node.children.emplace_back(std::string("thing"));
  return node;
}

inline std::vector<std::string> random_units(Rng& rng) {
  static const char* vocab[] = {"box", "mask", "keypoint", "depth", "point3d"};
  std::vector<std::string> units;
  const std::size_t n = uniform_int(rng, 1, 2);
  for (std::size_t i = 0; i < n; ++i) units.push_back(vocab[uniform_int(rng, 0, std::size(vocab) - 1)]);
  return units;
}

inline trpkit::Triplet random_triplet(Rng& rng) {
  trpkit::Triplet t;
  t.phrase = random_phrase(rng, 0);
  const std::size_t bindings = uniform_int(rng, 1, 3);
  for (std::size_t b = 0; b < bindings; ++b) {
    trpkit::UnitBinding binding;
    binding.units = random_units(rng);
    const std::size_t refs = uniform_int(rng, 1, 4);
    for (std::size_t i = 0; i < refs; ++i) binding.refs.push_back({i, 0});
    t.bindings.push_back(std::move(binding));
  }
  return t;
}

inline trpkit::AnswerAst random_ast(Rng& rng) {
  trpkit::AnswerAst ast;
  const std::size_t n = uniform_int(rng, 0, 6);
  bool prev_text = false;
  for (std::size_t i = 0; i < n; ++i) {
    if (!prev_text && coin(rng, 0.4)) {
      ast.segments.emplace_back(random_words(rng));
      prev_text = true;
    } else {
      ast.segments.emplace_back(random_triplet(rng));
      prev_text = false;
    }
  }
  return ast;
}

// ---- geometry ----

// `degenerate` is the chance of forcing a zero width.
inline trpkit::Box random_box(Rng& rng, double degenerate = 0.0) {
  double xa = uniform_real(rng), xb = uniform_real(rng);
  double ya = uniform_real(rng), yb = uniform_real(rng);
  if (degenerate > 0.0 && coin(rng, degenerate)) xb = xa;
  return trpkit::Box{std::min(xa, xb), std::min(ya, yb), std::max(xa, xb), std::max(ya, yb)};
}

inline trpkit::BinaryMask random_mask(Rng& rng, std::size_t h, std::size_t w, double density = 0.5) {
  trpkit::BinaryMask m(h, w);
  for (auto& v : m.data) v = coin(rng, density) ? 1 : 0;
  return m;
}

// ---- matching ----

inline trpkit::CostMatrix random_costs(Rng& rng, std::size_t n, std::size_t m, bool ties) {
  trpkit::CostMatrix c(n, m);
  for (auto& v : c.data) v = ties ? static_cast<double>(uniform_int(rng, 0, 3)) : uniform_real(rng, -5.0, 20.0);
  return c;
}

// ---- aggregation ----

inline trpkit::FeatureGrid random_features(Rng& rng, std::size_t c, std::size_t n, std::size_t h, std::size_t w) {
  trpkit::FeatureGrid x(c, n, h, w);
  for (auto& v : x.data) v = uniform_real(rng, -3.0, 3.0);
  return x;
}

inline trpkit::PromptMask random_prompt_mask(Rng& rng, std::size_t q, std::size_t n, std::size_t h, std::size_t w) {
  trpkit::PromptMask m(q, n, h, w);
  for (auto& v : m.data) v = uniform_real(rng);
  return m;
}

// V[q][n][c] written straight from the definition, flat indexing.
inline std::vector<double> naive_aggregate(const trpkit::FeatureGrid& x, const trpkit::PromptMask& m) {
  const std::size_t C = x.channels, N = x.patches, H = x.patch_h, W = x.patch_w, Q = m.queries;
  std::vector<double> v(Q * N * C, 0.0);
  for (std::size_t q = 0; q < Q; ++q)
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t c = 0; c < C; ++c) {
        double s = 0.0;
        for (std::size_t h = 0; h < H; ++h)
          for (std::size_t w = 0; w < W; ++w)
            s += x.data[((c * N + n) * H + h) * W + w] * m.data[((q * N + n) * H + h) * W + w];
        v[(q * N + n) * C + c] = s;
      }
  return v;
}

inline double naive_pe(std::size_t n, std::size_t c, std::size_t C, double s) {
  return std::cos(static_cast<double>(n) / std::pow(s, 2.0 * static_cast<double>(c) / static_cast<double>(C)));
}

// ---- metrics ----

// Table-backed provider whose vectors can be scaled after the fact.
class ToyProvider final : public trpkit::EmbeddingProvider {
 public:
  ToyProvider(std::size_t dim, std::map<std::string, std::vector<double>, std::less<>> table, double scale = 1.0)
      : dim_(dim), table_(std::move(table)), scale_(scale) {}
  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(std::string_view text) const override {
    auto it = table_.find(text);
    if (it == table_.end()) throw trpkit::Error(trpkit::ErrorKind::MissingEmbedding, std::string(text));
    auto v = it->second;
    for (auto& x : v) x *= scale_;
    return v;
  }

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> table_;
  double scale_;
};

// All-point AP written as the mean, over ground truth, of the best precision
// reachable at or after the rank where that ground truth was found.
inline double reference_ap(const std::vector<bool>& hits_in_rank_order, std::size_t num_gt) {
  const std::size_t n = hits_in_rank_order.size();
  std::vector<double> precision(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    tp += hits_in_rank_order[k];
    precision[k] = double(tp) / double(k + 1);
  }
  double sum = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!hits_in_rank_order[k]) continue;
    double best = 0.0;
    for (std::size_t j = k; j < n; ++j) best = std::max(best, precision[j]);
    sum += best;
  }
  return sum / double(num_gt);
}

// ---- corpus ----

inline trpkit::TemplateBank default_bank() {
  trpkit::TemplateBank bank;
  bank.templates = {
      {"det", {"Please detect bounding boxes in the image<image>.", "Locate every object in <image>."}},
      {"seg", {"Please segment the objects in the image<image>.", "Give a mask for each object in <image>."}},
      {"rec", {"Please locate <referring expression> in the image<image>."}},
      {"res", {"Please segment <referring expression> in the image<image>."}},
      {"reg", {"What is in <region> of the image<image>?"}},
      {"gcg-box", {"Describe the image<image> and ground the objects with boxes."}},
      {"gcg-mask", {"Describe the image<image> and ground the objects with masks."}},
      {"interactive-mask", {"Segment the object at <region> in the image<image>."}},
  };
  return bank;
}

inline trpkit::Rle random_rle(Rng& rng, std::size_t h, std::size_t w) {
  auto m = random_mask(rng, h, w, 0.4);
  if (m.count() == 0) m.data[0] = 1;
  return trpkit::rle_encode(m);
}

// Annotations with repeated labels, both geometries and the odd empty image.
inline std::vector<trpkit::Annotation> random_annotations(Rng& rng, std::size_t count) {
  static const char* labels[] = {"person", "dog", "red apple", "car", "electric boat", "Traffic Light", "cup"};
  std::vector<trpkit::Annotation> out;
  for (std::size_t i = 0; i < count; ++i) {
    trpkit::Annotation a;
    a.image_id = "img" + std::to_string(i);
    const std::size_t regions = coin(rng, 0.1) ? 0 : uniform_int(rng, 1, 6);
    for (std::size_t r = 0; r < regions; ++r) {
      trpkit::AnnotatedRegion region;
      region.label = labels[uniform_int(rng, 0, std::size(labels) - 1)];
      region.box = random_box(rng);
      region.mask = random_rle(rng, 4, 5);
      a.regions.push_back(std::move(region));
    }
    out.push_back(std::move(a));
  }
  return out;
}

}  // namespace testsupport
