#include "trpkit/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "trpkit/error.hpp"

namespace trpkit {

double region_iou(const Region& a, const Region& b) {
  if (a.index() != b.index()) throw Error(ErrorKind::MixedUnits, "cannot compare a box with a mask");
  if (const auto* ba = std::get_if<Box>(&a)) return box_iou(*ba, std::get<Box>(b));
  return mask_iou(std::get<BinaryMask>(a), std::get<BinaryMask>(b));
}

double rec_accuracy(const std::vector<Box>& preds, const std::vector<Box>& gts) {
  if (preds.size() != gts.size()) {
    throw Error(ErrorKind::LengthMismatch,
                std::to_string(preds.size()) + " predictions vs " + std::to_string(gts.size()) + " references");
  }
  if (preds.empty()) throw Error(ErrorKind::EmptyDataset, "no pairs");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += box_iou(preds[i], gts[i]) >= 0.5;
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double ciou(const std::vector<MaskPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyDataset, "no pairs");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (const auto& [p, g] : pairs) {
    const auto c = mask_overlap(p, g);
    inter += c.intersection;
    uni += c.uni;
  }
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double miou(const std::vector<MaskPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::EmptyDataset, "no pairs");
  double sum = 0.0;
  for (const auto& [p, g] : pairs) sum += mask_iou(p, g);
  return sum / static_cast<double>(pairs.size());
}

namespace {

double class_ap(std::vector<const ScoredDetection*> dets, const std::vector<GroundTruth>& gts, double thresh) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const ScoredDetection* a, const ScoredDetection* b) { return a->score > b->score; });
  std::vector<char> taken(gts.size(), 0);
  std::vector<double> precision;
  std::vector<double> recall;
  std::size_t tp = 0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    double best = -1.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (taken[g] || gts[g].image_id != dets[k]->image_id) continue;
      const double iou = region_iou(dets[k]->region, gts[g].region);
      if (iou > best) {
        best = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best >= thresh) {
      taken[best_gt] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(k + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  for (std::size_t k = precision.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t k = 0; k < precision.size(); ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> checked_embedding(const EmbeddingProvider& ep, std::string_view text) {
  auto e = ep.embed(text);
  if (e.size() != ep.dim()) throw Error(ErrorKind::DimensionMismatch, "embedding of '" + std::string(text) + "'");
  double norm = 0.0;
  for (double x : e) norm += x * x;
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw Error(ErrorKind::ZeroNormEmbedding, "embedding of '" + std::string(text) + "' has no usable norm");
  }
  return e;
}

}  // namespace

double ap_at_iou(const std::vector<ScoredDetection>& dets, const std::vector<std::vector<GroundTruth>>& gts,
                 double iou_thresh) {
  std::vector<std::vector<const ScoredDetection*>> by_class(gts.size());
  for (const auto& d : dets) {
    if (d.assigned_class < gts.size()) by_class[d.assigned_class].push_back(&d);
  }
  double sum = 0.0;
  std::size_t classes = 0;
  for (std::size_t k = 0; k < gts.size(); ++k) {
    if (gts[k].empty()) continue;
    sum += class_ap(by_class[k], gts[k], iou_thresh);
    ++classes;
  }
  if (classes == 0) throw Error(ErrorKind::EmptyDataset, "no class has ground truth");
  return sum / static_cast<double>(classes);
}

std::vector<double> HashedNgramEmbedder::embed(std::string_view text) const {
  std::string padded = " ";
  for (char c : text) padded.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  padded.push_back(' ');
  std::vector<double> v(dim_, 0.0);
  if (padded.size() < n_) return v;
  for (std::size_t i = 0; i + n_ <= padded.size(); ++i) {
    std::uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (std::size_t j = 0; j < n_; ++j) {
      h ^= static_cast<unsigned char>(padded[i + j]);
      h *= 1099511628211ULL;
    }
    v[h % dim_] += 1.0;
  }
  return v;
}

EmbeddingTable::EmbeddingTable(std::size_t dim, std::map<std::string, std::vector<double>, std::less<>> table)
    : dim_(dim), table_(std::move(table)) {
  for (const auto& [k, v] : table_) {
    if (v.size() != dim_) throw Error(ErrorKind::SchemaError, "vector for '" + k + "' has wrong dimension");
  }
}

EmbeddingTable EmbeddingTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, path);
  nlohmann::json doc;
  try {
    in >> doc;
    std::map<std::string, std::vector<double>, std::less<>> table;
    for (const auto& [k, v] : doc.at("embeddings").items()) table.emplace(k, v.get<std::vector<double>>());
    return EmbeddingTable(doc.at("dim").get<std::size_t>(), std::move(table));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

std::vector<double> EmbeddingTable::embed(std::string_view text) const {
  auto it = table_.find(text);
  if (it == table_.end()) throw Error(ErrorKind::MissingEmbedding, "no vector for '" + std::string(text) + "'");
  return it->second;
}

std::vector<ScoredDetection> assign_by_similarity(const std::vector<PhrasePrediction>& preds,
                                                  const std::vector<std::string>& class_names,
                                                  const EmbeddingProvider& ep) {
  std::vector<std::vector<double>> class_vecs;
  for (const auto& name : class_names) class_vecs.push_back(checked_embedding(ep, name));

  std::vector<ScoredDetection> out;
  for (const auto& p : preds) {
    const auto e = checked_embedding(ep, p.phrase);
    ScoredDetection d{p.phrase, p.region, -2.0, 0, p.image_id};
    for (std::size_t k = 0; k < class_vecs.size(); ++k) {
      const double s = cosine(e, class_vecs[k]);
      if (s > d.score) {
        d.score = s;
        d.assigned_class = k;
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<double> coco_iou_thresholds() {
  std::vector<double> t;
  for (int i = 0; i < 10; ++i) t.push_back(0.5 + 0.05 * i);
  return t;
}

MapSResult map_s_detailed(const std::vector<PhrasePrediction>& preds, const std::vector<std::string>& class_names,
                          const std::vector<std::vector<GroundTruth>>& gts, const EmbeddingProvider& ep,
                          const std::vector<double>& thresholds) {
  if (class_names.empty()) throw Error(ErrorKind::EmptyDataset, "no ground-truth classes");
  if (class_names.size() != gts.size()) throw Error(ErrorKind::LengthMismatch, "class names vs ground-truth lists");
  const auto dets = assign_by_similarity(preds, class_names, ep);
  MapSResult r;
  for (double t : thresholds) {
    const double ap = ap_at_iou(dets, gts, t);
    r.per_threshold.emplace_back(t, ap);
    r.map_s += ap;
  }
  if (!thresholds.empty()) r.map_s /= static_cast<double>(thresholds.size());
  r.ap50 = ap_at_iou(dets, gts, 0.5);
  return r;
}

double map_s(const std::vector<PhrasePrediction>& preds, const std::vector<std::string>& class_names,
             const std::vector<std::vector<GroundTruth>>& gts, const EmbeddingProvider& ep) {
  return map_s_detailed(preds, class_names, gts, ep).map_s;
}

}  // namespace trpkit
