#pragma once

// Region-level evaluation: REC accuracy, cIoU / mIoU, AP at a fixed IoU
// threshold, and mAP-Similarity, where class and confidence of a predicted
// phrase come from its cosine similarity to every class name.

#include <cstddef>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "trpkit/geometry.hpp"

namespace trpkit {

using Region = std::variant<Box, BinaryMask>;

/// IoU of two regions of the same kind. Throws Error{MixedUnits}.
double region_iou(const Region& a, const Region& b);

/// Fraction of aligned pairs with IoU >= 0.5.
/// Throws Error{LengthMismatch, EmptyDataset}.
double rec_accuracy(const std::vector<Box>& preds, const std::vector<Box>& gts);

using MaskPair = std::pair<BinaryMask, BinaryMask>;
/// Pooled intersection over pooled union. Throws Error{EmptyDataset, DimensionMismatch}.
double ciou(const std::vector<MaskPair>& pairs);
/// Mean of per-pair IoU. Throws Error{EmptyDataset, DimensionMismatch}.
double miou(const std::vector<MaskPair>& pairs);

struct ScoredDetection {
  std::string phrase;
  Region region;
  double score = 0.0;  // only its rank order matters
  std::size_t assigned_class = 0;
  std::string image_id;
};

struct GroundTruth {
  Region region;
  std::string image_id;
};

/// gts[k] lists the ground truth of class k. Detections are ranked by
/// descending score (ties keep input order) and greedily matched to the
/// unmatched same-image ground truth of highest IoU when that IoU reaches
/// `iou_thresh`. AP is the area under the monotone precision envelope,
/// averaged over classes that have ground truth.
/// Throws Error{EmptyDataset} when no class has ground truth.
double ap_at_iou(const std::vector<ScoredDetection>& dets, const std::vector<std::vector<GroundTruth>>& gts,
                 double iou_thresh);

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::size_t dim() const = 0;
  /// Deterministic within a run. Throws Error{MissingEmbedding} when the
  /// provider cannot embed `text`.
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

/// Hashes character trigrams of the padded, lowercased text into a fixed
/// number of buckets. Cheap, deterministic, no model files.
class HashedNgramEmbedder final : public EmbeddingProvider {
 public:
  explicit HashedNgramEmbedder(std::size_t dim = 256, std::size_t n = 3) : dim_(dim), n_(n) {}
  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::size_t n_;
};

/// Precomputed string -> vector table, e.g. loaded from an embedding file:
///   {"dim": 3, "embeddings": {"person": [0.1, 0.2, 0.3], ...}}
class EmbeddingTable final : public EmbeddingProvider {
 public:
  EmbeddingTable(std::size_t dim, std::map<std::string, std::vector<double>, std::less<>> table);
  /// Throws Error{UnreadableFile, SchemaError}.
  static EmbeddingTable load(const std::string& path);

  std::size_t dim() const override { return dim_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dim_;
  std::map<std::string, std::vector<double>, std::less<>> table_;
};

struct PhrasePrediction {
  std::string phrase;
  Region region;
  std::string image_id;
};

/// Argmax cosine similarity against each class name; the maximum becomes the
/// detection score. Throws Error{ZeroNormEmbedding}.
std::vector<ScoredDetection> assign_by_similarity(const std::vector<PhrasePrediction>& preds,
                                                  const std::vector<std::string>& class_names,
                                                  const EmbeddingProvider& ep);

/// 0.50, 0.55, ..., 0.95.
std::vector<double> coco_iou_thresholds();

struct MapSResult {
  double map_s = 0.0;
  double ap50 = 0.0;
  std::vector<std::pair<double, double>> per_threshold;  // (threshold, AP)
};

MapSResult map_s_detailed(const std::vector<PhrasePrediction>& preds, const std::vector<std::string>& class_names,
                          const std::vector<std::vector<GroundTruth>>& gts, const EmbeddingProvider& ep,
                          const std::vector<double>& thresholds = coco_iou_thresholds());

double map_s(const std::vector<PhrasePrediction>& preds, const std::vector<std::string>& class_names,
             const std::vector<std::vector<GroundTruth>>& gts, const EmbeddingProvider& ep);

}  // namespace trpkit
