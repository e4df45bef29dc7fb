// trpkit command line: corpus building, validation and statistics, plus
// matching, evaluation and aggregation on JSON inputs.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "trpkit/aggregation.hpp"
#include "trpkit/corpus.hpp"
#include "trpkit/error.hpp"
#include "trpkit/matching.hpp"
#include "trpkit/metrics.hpp"

using nlohmann::json;
using namespace trpkit;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

Box box_of(const json& j) {
  const auto v = j.get<std::vector<double>>();
  if (v.size() != 4) throw Error(ErrorKind::SchemaError, "box needs 4 coordinates");
  return Box::checked(v[0], v[1], v[2], v[3]);
}

BinaryMask mask_of(const json& j) {
  const auto size = j.at("size").get<std::vector<std::size_t>>();
  if (size.size() != 2) throw Error(ErrorKind::SchemaError, "mask size needs [H, W]");
  return rle_decode(Rle{size[0], size[1], j.at("counts").get<std::vector<std::size_t>>()});
}

Region region_of(const json& j) {
  if (j.is_array()) return box_of(j);
  return mask_of(j);
}

json dump_tensor(const std::vector<std::size_t>& shape, const std::vector<double>& data) {
  return json{{"shape", shape}, {"data", data}};
}

int cmd_validate(const std::string& path, bool strict) {
  const auto report = validate_corpus(path);
  for (const auto& v : report.violations) std::cout << "sample " << v.sample << ": violation: " << v.message << "\n";
  for (const auto& n : report.notices) std::cout << "sample " << n.sample << ": notice: " << n.message << "\n";
  std::cout << report.samples << " samples, " << report.violations.size() << " violations, "
            << report.notices.size() << " notices\n";
  return report.ok(strict) ? kOk : kFailed;
}

int cmd_build(const std::string& ann_path, const std::string& task_name, const std::string& bank_path,
              std::uint64_t seed, const std::string& out_path) {
  const auto task = parse_task_kind(task_name);
  if (!task) {
    std::cerr << "unknown task '" << task_name << "'\n";
    return kUsage;
  }
  const auto bank = TemplateBank::load(bank_path);
  Corpus corpus;
  corpus.template_bank_hash = bank.hash();
  corpus.samples = build_samples(load_annotations(ann_path), *task, bank, seed);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorKind::UnreadableFile, out_path);
  out << serialize_corpus(corpus);
  if (!out) throw Error(ErrorKind::UnreadableFile, out_path);
  std::cout << "wrote " << corpus.samples.size() << " samples to " << out_path << "\n";
  return kOk;
}

int cmd_match(const std::string& preds_path, const std::string& targets_path, const std::string& unit,
              const CostWeights& w) {
  const json preds = read_json(preds_path).at("groups");
  const json targets = read_json(targets_path).at("groups");
  if (preds.size() != targets.size()) {
    throw Error(ErrorKind::LengthMismatch, std::to_string(preds.size()) + " prediction groups vs " +
                                               std::to_string(targets.size()) + " target groups");
  }
  std::vector<MatchGroup> groups(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    for (const auto& p : preds[i]) {
      if (unit == "box") {
        groups[i].predictions.emplace_back(box_of(p));
      } else {
        const auto size = p.at("size").get<std::vector<std::size_t>>();
        if (size.size() != 2) throw Error(ErrorKind::SchemaError, "mask size needs [H, W]");
        SoftMask m{size[0], size[1], p.at("probs").get<std::vector<double>>()};
        if (m.probs.size() != m.height * m.width) throw Error(ErrorKind::SchemaError, "probs do not cover size");
        groups[i].predictions.emplace_back(std::move(m));
      }
    }
    for (const auto& t : targets[i]) {
      if (unit == "box") {
        groups[i].targets.emplace_back(box_of(t));
      } else {
        groups[i].targets.emplace_back(mask_of(t));
      }
    }
  }
  const auto tensor = build_cost_tensor(groups, w);
  const auto assignments = group_match_parallel(tensor);
  json out_groups = json::array();
  double total = 0.0;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    json pairs = json::array();
    for (const auto& [n, m] : assignments[i].pairs) {
      pairs.push_back({{"prediction", n}, {"target", m}, {"cost", tensor.cost(i, n, m)}});
    }
    out_groups.push_back({{"group", i}, {"pairs", pairs}, {"total_cost", assignments[i].total_cost}});
    total += assignments[i].total_cost;
  }
  std::cout << json{{"unit", unit}, {"groups", out_groups}, {"total_cost", total}}.dump(2) << "\n";
  return kOk;
}

std::vector<PhrasePrediction> read_phrase_predictions(const json& j) {
  std::vector<PhrasePrediction> out;
  for (const auto& d : j.at("detections")) {
    out.push_back({d.at("phrase").get<std::string>(), region_of(d.at("region")), d.value("image_id", "")});
  }
  return out;
}

int cmd_eval(const std::string& preds_path, const std::string& targets_path, const std::string& metric,
             const std::string& embeddings) {
  const json preds = read_json(preds_path);
  const json targets = read_json(targets_path);
  json out{{"metric", metric}};
  if (metric == "iou50") {
    std::vector<Box> p;
    std::vector<Box> g;
    for (const auto& r : preds.at("regions")) p.push_back(box_of(r));
    for (const auto& r : targets.at("regions")) g.push_back(box_of(r));
    out["value"] = rec_accuracy(p, g);
  } else if (metric == "ciou" || metric == "miou") {
    const auto& p = preds.at("regions");
    const auto& g = targets.at("regions");
    if (p.size() != g.size()) throw Error(ErrorKind::LengthMismatch, "prediction and target counts differ");
    std::vector<MaskPair> pairs;
    for (std::size_t i = 0; i < p.size(); ++i) pairs.emplace_back(mask_of(p[i]), mask_of(g[i]));
    out["value"] = metric == "ciou" ? ciou(pairs) : miou(pairs);
  } else {
    const auto classes = targets.at("classes").get<std::vector<std::string>>();
    std::vector<std::vector<GroundTruth>> gts(classes.size());
    for (const auto& g : targets.at("ground_truth")) {
      const auto name = g.at("class").get<std::string>();
      const auto it = std::find(classes.begin(), classes.end(), name);
      if (it == classes.end()) throw Error(ErrorKind::SchemaError, "ground truth class '" + name + "' not listed");
      gts[static_cast<std::size_t>(it - classes.begin())].push_back(
          {region_of(g.at("region")), g.value("image_id", "")});
    }
    std::unique_ptr<EmbeddingProvider> ep;
    if (embeddings.empty()) {
      ep = std::make_unique<HashedNgramEmbedder>();
    } else {
      ep = std::make_unique<EmbeddingTable>(EmbeddingTable::load(embeddings));
    }
    const auto r = map_s_detailed(read_phrase_predictions(preds), classes, gts, *ep);
    if (metric == "ap50") {
      out["value"] = r.ap50;
    } else {
      out["value"] = r.map_s;
      out["ap50"] = r.ap50;
      json per = json::array();
      for (const auto& [t, ap] : r.per_threshold) per.push_back({{"iou", t}, {"ap", ap}});
      out["per_threshold"] = per;
    }
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

VisualPrompt prompt_of(const json& j) {
  const auto type = j.at("type").get<std::string>();
  if (type == "point") return PointPrompt{j.at("x").get<double>(), j.at("y").get<double>()};
  if (type == "box") return box_of(j.at("box"));
  if (type == "scribble") {
    ScribblePrompt s;
    for (const auto& p : j.at("points")) {
      const auto xy = p.get<std::vector<double>>();
      if (xy.size() != 2) throw Error(ErrorKind::SchemaError, "scribble points are [x, y]");
      s.points.push_back({xy[0], xy[1]});
    }
    return s;
  }
  if (type == "mask") return mask_of(j);
  throw Error(ErrorKind::SchemaError, "unknown prompt type '" + type + "'");
}

int cmd_aggregate(const std::string& features_path, const std::string& prompt_path) {
  const json fj = read_json(features_path);
  const json pj = read_json(prompt_path);
  GridLayout layout;
  if (fj.contains("layout")) {
    const auto& l = fj.at("layout");
    layout.patch_rows = l.value("patch_rows", layout.patch_rows);
    layout.patch_cols = l.value("patch_cols", layout.patch_cols);
    layout.patch_h = l.value("patch_h", layout.patch_h);
    layout.patch_w = l.value("patch_w", layout.patch_w);
  }
  FeatureGrid x(fj.at("channels").get<std::size_t>(), layout.patches(), layout.patch_h, layout.patch_w);
  const auto data = fj.at("data").get<std::vector<double>>();
  if (data.size() != x.data.size()) {
    throw Error(ErrorKind::DimensionMismatch,
                "features need " + std::to_string(x.data.size()) + " values, got " + std::to_string(data.size()));
  }
  x.data = data;
  PeConfig pe;
  pe.temperature = pj.value("temperature", pe.temperature);
  pe.alpha = pj.value("alpha", pe.alpha);
  RasterConfig raster;
  raster.point_radius = pj.value("point_radius", raster.point_radius);
  const auto mask = prompt_to_mask(prompt_of(pj), layout, pj.value("queries", std::size_t{1}), raster);
  const auto v = aggregate(x, mask);
  const auto fused = fuse(v, pe);
  const std::vector<std::size_t> shape{v.queries, v.patches, v.channels};
  std::cout << json{{"V", dump_tensor(shape, v.data)}, {"fused", dump_tensor(shape, fused.data)}}.dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"trpkit: referring-triplet corpus and evaluation tools"};
  app.require_subcommand(1);

  std::string corpus_path;
  bool strict = false;
  auto* validate = app.add_subcommand("validate", "Check every sample of a corpus");
  validate->add_option("corpus", corpus_path, "Corpus file")->required();
  validate->add_flag("--strict", strict, "Treat notices as failures");

  std::string ann_path, task, bank_path, out_path;
  std::uint64_t seed = 0;
  auto* build = app.add_subcommand("build", "Build a corpus from region annotations");
  build->add_option("annotations", ann_path, "Annotation file")->required();
  build->add_option("--task", task, "det|seg|rec|res|reg|gcg-box|gcg-mask|interactive-mask")->required();
  build->add_option("--templates", bank_path, "Template bank file")->required();
  build->add_option("--seed", seed, "Template selection seed")->required();
  build->add_option("--out", out_path, "Output corpus file")->required();

  std::string preds_path, targets_path, unit;
  CostWeights weights;
  auto* match = app.add_subcommand("match", "Grouped Hungarian matching of predictions to targets");
  match->add_option("preds", preds_path, "Predictions file")->required();
  match->add_option("targets", targets_path, "Targets file")->required();
  match->add_option("--unit", unit, "box|mask")->required()->check(CLI::IsMember({"box", "mask"}));
  match->add_option("--l1", weights.l1, "L1 weight");
  match->add_option("--giou", weights.giou, "GIoU weight");
  match->add_option("--mask", weights.mask, "BCE weight");
  match->add_option("--dice", weights.dice, "Dice weight");

  std::string metric, embeddings;
  auto* eval = app.add_subcommand("eval", "Evaluate predictions against targets");
  eval->add_option("preds", preds_path, "Predictions file")->required();
  eval->add_option("targets", targets_path, "Targets file")->required();
  eval->add_option("--metric", metric, "iou50|ciou|miou|ap50|maps")
      ->required()
      ->check(CLI::IsMember({"iou50", "ciou", "miou", "ap50", "maps"}));
  eval->add_option("--embeddings", embeddings, "Embedding table for ap50/maps");

  auto* stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("corpus", corpus_path, "Corpus file")->required();

  std::string features_path, prompt_path;
  auto* agg = app.add_subcommand("aggregate-demo", "Dump pooled and fused prompt features");
  agg->add_option("features", features_path, "Feature grid file")->required();
  agg->add_option("prompt", prompt_path, "Visual prompt file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*validate) return cmd_validate(corpus_path, strict);
    if (*build) return cmd_build(ann_path, task, bank_path, seed, out_path);
    if (*match) return cmd_match(preds_path, targets_path, unit, weights);
    if (*eval) return cmd_eval(preds_path, targets_path, metric, embeddings);
    if (*stats) {
      std::cout << to_json(corpus_stats(corpus_path)).dump(2) << "\n";
      return kOk;
    }
    if (*agg) return cmd_aggregate(features_path, prompt_path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const json::exception& e) {
    std::cerr << "error: malformed input: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
