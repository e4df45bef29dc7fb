// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "support.hpp"
#include "trpkit/aggregation.hpp"
#include "trpkit/corpus.hpp"
#include "trpkit/error.hpp"
#include "trpkit/geometry.hpp"
#include "trpkit/matching.hpp"
#include "trpkit/metrics.hpp"
#include "trpkit/router.hpp"
#include "trpkit/trp_grammar.hpp"
#include "trpkit/vdcot.hpp"
#include "worked_examples.hpp"

#ifndef TRPKIT_CLI_PATH
#define TRPKIT_CLI_PATH "trpkit"
#endif

using namespace trpkit;
using testsupport::Rng;
using testsupport::uniform_int;
using testsupport::uniform_real;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
  void expect(bool ok, const std::string& why) {
    if (!ok) fail(why);
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------- 1

Outcome grammar_round_trip() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(1001);
  for (int i = 0; i < 1000 && o.pass; ++i) {
    const auto ast = testsupport::random_ast(rng);
    const auto text = emit_answer(ast);
    try {
      o.expect(parse_answer(text) == ast, "round trip differs for: " + text);
    } catch (const Error& e) {
      o.fail(std::string("emitted text failed to parse: ") + e.what());
    }
  }

  auto clean = [&](const std::string& name, const char* cot, const char* answer) {
    try {
      const auto ast = parse_answer(answer);
      const auto block = parse_cot(cot);
      o.expect(validate_triplets(ast).empty(), name + ": triplet violations");
      o.expect(check_consistency(block, ast).empty(), name + ": consistency violations");
    } catch (const Error& e) {
      o.fail(name + ": " + e.what());
    }
  };
  clean("gcg example", examples::kGcgCot, examples::kGcgAnswer);
  clean("detection example", examples::kDetCot, examples::kDetAnswer);

  const double t = seconds_since(t0);
  o.expect(t < 5.0, "took " + fmt(t) + " s");
  if (o.pass) o.detail = "1000 round trips, both worked examples clean, " + fmt(t) + " s";
  return o;
}

// ---------------------------------------------------------------- 2

// Strict parse plus the answer-level and CoT-level checks; no target geometry.
std::size_t consistency_violations(const std::string& cot, const std::string& answer) {
  try {
    const auto ast = parse_answer(answer);
    const auto block = parse_cot(cot);
    return validate_triplets(ast).size() + check_consistency(block, ast).size();
  } catch (const Error&) {
    return 1;
  }
}

struct Mutant {
  std::string what;
  std::string cot;
  std::string answer;
};

std::vector<Mutant> mutants_of(const Sample& s) {
  std::vector<Mutant> out;
  auto each = [&](const std::string& text, const std::regex& re, auto&& edit, const std::string& what, bool on_cot) {
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
      const auto pos = static_cast<std::size_t>(it->position());
      std::string changed = text;
      changed.replace(pos, it->length(), edit(it->str()));
      out.push_back({what + " @" + std::to_string(pos), on_cot ? changed : s.cot, on_cot ? s.answer : changed});
    }
  };
  const auto& a = s.answer;
  each(a, std::regex(R"(\[\d+\]<REF>)"), [](const std::string&) { return std::string(); }, "delete [i]<REF>", false);
  each(a, std::regex("<REF>"), [](const std::string&) { return std::string(); }, "delete <REF>", false);
  each(a, std::regex("<Phrase>"), [](const std::string& m) { return m + "zzqx"; }, "rename phrase", false);
  each(a, std::regex("<Unit>box</Unit>"), [](const std::string&) { return std::string("<Unit>mask</Unit>"); },
       "box to mask", false);
  each(a, std::regex("<Unit>mask</Unit>"), [](const std::string&) { return std::string("<Unit>box</Unit>"); },
       "mask to box", false);
  for (int delta : {-1, +1}) {
    each(s.cot, std::regex(R"(Num: \d+)"),
         [delta](const std::string& m) { return "Num: " + std::to_string(std::stoi(m.substr(5)) + delta); },
         delta < 0 ? "Num - 1" : "Num + 1", true);
  }
  return out;
}

Outcome mutation_detection() {
  Outcome o;
  Rng rng(2002);
  const auto bank = testsupport::default_bank();
  const TaskKind tasks[] = {TaskKind::Det, TaskKind::Seg, TaskKind::GcgBox, TaskKind::GcgMask, TaskKind::Rec,
                            TaskKind::Res};
  std::vector<Sample> samples;
  for (std::size_t round = 0; samples.size() < 200; ++round) {
    const auto anns = testsupport::random_annotations(rng, 10);
    for (auto& s : build_samples(anns, tasks[round % std::size(tasks)], bank, round)) {
      if (samples.size() < 200 && !parse_answer(s.answer).triplets().empty()) samples.push_back(std::move(s));
    }
  }

  std::size_t mutants = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const auto check = check_sample(s);
    o.expect(check.violations.empty(), "false positive on sample " + std::to_string(i));
    o.expect(consistency_violations(s.cot, s.answer) == 0, "consistency false positive on sample " + std::to_string(i));
    for (const auto& m : mutants_of(s)) {
      ++mutants;
      o.expect(consistency_violations(m.cot, m.answer) > 0,
               "missed mutant '" + m.what + "' of sample " + std::to_string(i) + ": " + m.answer);
    }
  }
  if (o.pass) o.detail = std::to_string(samples.size()) + " samples clean, " + std::to_string(mutants) + " mutants flagged";
  return o;
}

// ---------------------------------------------------------------- 3, 4

GroupCostTensor pack(const std::vector<CostMatrix>& groups, const std::vector<ValidMask>* masks = nullptr,
                     double pad_cost = std::numeric_limits<double>::quiet_NaN()) {
  GroupCostTensor t;
  t.batch = groups.size();
  for (const auto& g : groups) {
    t.n_max = std::max(t.n_max, g.rows);
    t.m_max = std::max(t.m_max, g.cols);
  }
  t.costs.assign(t.batch * t.n_max * t.m_max, pad_cost);
  t.valid.assign(t.costs.size(), 0);
  for (std::size_t i = 0; i < t.batch; ++i) {
    const auto& g = groups[i];
    t.group_sizes.emplace_back(g.rows, g.cols);
    for (std::size_t n = 0; n < g.rows; ++n)
      for (std::size_t m = 0; m < g.cols; ++m) {
        const bool ok = !masks || (*masks)[i](n, m);
        t.valid[t.offset(i, n, m)] = ok;
        t.costs[t.offset(i, n, m)] = ok ? g(n, m) : pad_cost;
      }
  }
  return t;
}

bool same_bits(const Assignment& a, const Assignment& b) {
  return a.pairs == b.pairs && std::memcmp(&a.total_cost, &b.total_cost, sizeof(double)) == 0;
}

Outcome matching_equivalence() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(3003);
  std::vector<CostMatrix> groups;
  for (int i = 0; i < 500; ++i) {
    const auto n = uniform_int(rng, 1, 6);
    groups.push_back(testsupport::random_costs(rng, n, n, testsupport::coin(rng, 0.3)));
  }
  for (int i = 0; i < 500; ++i) {
    const auto small = uniform_int(rng, 1, 6);
    const auto large = uniform_int(rng, small + 1, 9);
    const bool tall = testsupport::coin(rng);
    groups.push_back(testsupport::random_costs(rng, tall ? large : small, tall ? small : large,
                                               testsupport::coin(rng, 0.3)));
  }

  std::vector<Assignment> sequential;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    const auto h = hungarian_assign(g);
    const auto b = brute_force_match(g);
    sequential.push_back(h);
    o.expect(h.total_cost == b.total_cost,
             "group " + std::to_string(i) + ": hungarian " + fmt(h.total_cost) + " vs brute force " + fmt(b.total_cost));
    o.expect(h.pairs.size() == std::min(g.rows, g.cols), "group " + std::to_string(i) + ": not a maximum matching");
    if (g.rows == g.cols) {
      std::set<std::size_t> rows, cols;
      for (auto [r, c] : h.pairs) rows.insert(r), cols.insert(c);
      o.expect(rows.size() == g.rows && cols.size() == g.cols,
               "group " + std::to_string(i) + ": square group without a perfect matching");
    }
  }

  const auto tensor = pack(groups);
  for (std::size_t threads : {std::size_t{1}, std::size_t{4}, std::size_t{0}}) {
    const auto parallel = group_match_parallel(tensor, threads);
    for (std::size_t i = 0; i < groups.size(); ++i) {
      o.expect(same_bits(parallel[i], sequential[i]),
               "group " + std::to_string(i) + " differs with " + std::to_string(threads) + " threads");
    }
  }

  const double t = seconds_since(t0);
  o.expect(t < 30.0, "took " + fmt(t) + " s");
  if (o.pass) o.detail = "1000 groups equal brute force, parallel bit-identical, " + fmt(t) + " s";
  return o;
}

Outcome invalid_exclusion() {
  Outcome o;
  Rng rng(4004);
  std::size_t solved = 0;
  for (int round = 0; round < 50; ++round) {
    std::vector<CostMatrix> groups;
    std::vector<ValidMask> masks;
    for (int i = 0; i < 20; ++i) {
      const auto n = uniform_int(rng, 1, 7), m = uniform_int(rng, 1, 7);
      groups.push_back(testsupport::random_costs(rng, n, m, testsupport::coin(rng, 0.3)));
      ValidMask mask(n, m, 1);
      // Knock out a few cells but keep a perfect matching available.
      std::vector<std::size_t> keep(std::max(n, m));
      std::iota(keep.begin(), keep.end(), 0);
      std::shuffle(keep.begin(), keep.end(), rng);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c)
          if (keep[r] % m != c && testsupport::coin(rng, 0.4)) mask(r, c) = 0;
      masks.push_back(std::move(mask));
    }
    // Padding and masked cells carry a cost far below any real entry.
    const auto tensor = pack(groups, &masks, -1e12);
    std::vector<Assignment> result;
    try {
      result = group_match_parallel(tensor, 0);
    } catch (const Error& e) {
      o.fail(std::string("solver failed: ") + e.what());
      break;
    }
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const auto [n, m] = tensor.group_sizes[i];
      for (auto [r, c] : result[i].pairs) {
        o.expect(r < n && c < m && tensor.is_valid(i, r, c),
                 "group " + std::to_string(i) + " uses invalid cell (" + std::to_string(r) + "," + std::to_string(c) + ")");
      }
      o.expect(result[i].total_cost > -1e11, "group " + std::to_string(i) + " cost includes a padding value");
      const auto direct = hungarian_assign(groups[i], &masks[i]);
      o.expect(same_bits(direct, result[i]), "group " + std::to_string(i) + ": padded and direct solves differ");
      ++solved;
    }
  }
  if (o.pass) o.detail = std::to_string(solved) + " adversarial groups, no invalid cell used";
  return o;
}

// ---------------------------------------------------------------- 5

Outcome aggregation_numerics() {
  Outcome o;
  Rng rng(5005);
  double worst = 0.0, worst_linear = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto c = uniform_int(rng, 1, 8), n = uniform_int(rng, 1, 9), hw = uniform_int(rng, 1, 8);
    const auto q = uniform_int(rng, 1, 4);
    const auto x = testsupport::random_features(rng, c, n, hw, hw);
    const auto m = testsupport::random_prompt_mask(rng, q, n, hw, hw);
    const auto v = aggregate(x, m);
    const auto fused = fuse(v);
    const auto ref = testsupport::naive_aggregate(x, m);
    for (std::size_t qi = 0; qi < q; ++qi)
      for (std::size_t ni = 0; ni < n; ++ni)
        for (std::size_t ci = 0; ci < c; ++ci) {
          const double r = ref[(qi * n + ni) * c + ci];
          worst = std::max(worst, std::abs(v.at(qi, ni, ci) - r));
          worst = std::max(worst, std::abs(fused.at(qi, ni, ci) - (r + testsupport::naive_pe(ni, ci, c, 10000.0))));
        }

    const auto pe = positional_encoding(n, c);
    for (std::size_t ci = 0; ci < c; ++ci) o.expect(pe[ci] == 1.0, "PE[0][" + std::to_string(ci) + "] != 1");
    for (double e : pe) o.expect(e >= -1.0 && e <= 1.0, "PE entry out of [-1, 1]");

    const auto m2 = testsupport::random_prompt_mask(rng, q, n, hw, hw);
    const double a = uniform_real(rng, -3, 3), b = uniform_real(rng, -3, 3);
    PromptMask mix = m;
    for (std::size_t k = 0; k < mix.data.size(); ++k) mix.data[k] = a * m.data[k] + b * m2.data[k];
    const auto v2 = aggregate(x, m2), vm = aggregate(x, mix);
    for (std::size_t k = 0; k < vm.data.size(); ++k)
      worst_linear = std::max(worst_linear, std::abs(vm.data[k] - (a * v.data[k] + b * v2.data[k])));
  }
  o.expect(worst <= 1e-12, "max deviation from naive loops " + fmt(worst));
  o.expect(worst_linear <= 1e-9, "max linearity error " + fmt(worst_linear));
  if (o.pass) o.detail = "max error " + fmt(worst) + ", linearity " + fmt(worst_linear);
  return o;
}

// ---------------------------------------------------------------- 6

Outcome geometry() {
  Outcome o;
  Rng rng(6006);
  o.expect(box_giou(Box{0, 0, 0.5, 1}, Box{0.5, 0, 1, 1}) == 0.0, "adjacent halves giou != 0");
  for (int i = 0; i < 10000; ++i) {
    const auto a = testsupport::random_box(rng), b = testsupport::random_box(rng);
    const double g = box_giou(a, b);
    o.expect(box_giou(a, a) == 1.0, "giou(a, a) != 1");
    o.expect(g <= box_iou(a, b), "giou > iou: " + fmt(g) + " vs " + fmt(box_iou(a, b)));
    o.expect(g > -1.0 && g <= 1.0, "giou out of (-1, 1]: " + fmt(g));
  }
  for (int i = 0; i < 1000; ++i) {
    const auto h = uniform_int(rng, 1, 16), w = uniform_int(rng, 1, 16);
    const auto mask = testsupport::random_mask(rng, h, w, uniform_real(rng));
    o.expect(rle_decode(rle_encode(mask)) == mask, "rle round trip differs");
  }
  if (o.pass) o.detail = "10000 box pairs, 1000 rle round trips";
  return o;
}

// ---------------------------------------------------------------- 7

BinaryMask bits(std::size_t w, std::vector<std::uint8_t> d) {
  BinaryMask m(1, w);
  m.data = std::move(d);
  return m;
}

Outcome metrics() {
  Outcome o;
  const MaskPair p1{bits(4, {1, 1, 1, 0}), bits(4, {0, 1, 1, 1})};
  const MaskPair p2{bits(4, {1, 0, 0, 0}), bits(4, {0, 0, 0, 0})};
  o.expect(ciou({p1, p2}) == 0.4, "ciou " + fmt(ciou({p1, p2})));
  o.expect(miou({p1, p2}) == 0.25, "miou " + fmt(miou({p1, p2})));

  const Box g{0.1, 0.1, 0.4, 0.4}, g2{0.5, 0.5, 0.8, 0.8}, miss{0.6, 0.0, 0.9, 0.3};
  auto det = [](Box b, double s) { return ScoredDetection{"", b, s, 0, ""}; };
  o.expect(ap_at_iou({det(g, 0.9)}, {{{g, ""}}}, 0.5) == 1.0, "single hit AP != 1");
  o.expect(ap_at_iou({det(miss, 0.9), det(g, 0.3)}, {{{g, ""}}}, 0.5) == 0.5, "miss-then-hit AP != 0.5");
  o.expect(ap_at_iou({det(g, 0.9), det(g, 0.8), det(g2, 0.7)}, {{{g, ""}, {g2, ""}}}, 0.5) == (1.0 + 2.0 / 3.0) / 2.0,
           "duplicate-detection AP != 5/6");

  // Orthogonal toy instance: three classes on the first three axes, a fourth
  // axis that no class uses carries the per-detection confidence.
  Rng rng(7007);
  const std::vector<std::string> classes{"cat", "dog", "cow"};
  std::map<std::string, std::vector<double>, std::less<>> table{
      {"cat", {1, 0, 0, 0}}, {"dog", {0, 1, 0, 0}}, {"cow", {0, 0, 1, 0}}};
  std::vector<std::vector<GroundTruth>> gts(3);
  std::vector<PhrasePrediction> preds;
  std::vector<ScoredDetection> standard;
  for (int img = 0; img < 6; ++img) {
    const std::string id = "img" + std::to_string(img);
    for (int k = 0; k < 4; ++k) {
      const auto cls = uniform_int(rng, 0, 2);
      const Box box = testsupport::random_box(rng);
      gts[cls].push_back({box, id});
      for (int d = 0; d < 2; ++d) {
        if (testsupport::coin(rng, 0.3)) continue;
        const double jitter = uniform_real(rng, -0.08, 0.08);
        const Box moved{std::clamp(box.x0 + jitter, 0.0, box.x1), box.y0, std::clamp(box.x1 + jitter, box.x0, 1.0), box.y1};
        const auto label = classes[cls];
        // Cosine with the class axis is 1 / sqrt(1 + r^2), decreasing in r.
        const double r = uniform_real(rng, 0.0, 3.0);
        const std::string phrase = label + "#" + std::to_string(preds.size());
        std::vector<double> v(4, 0.0);
        v[cls] = 1.0;
        v[3] = r;
        table[phrase] = v;
        preds.push_back({phrase, moved, id});
        standard.push_back({phrase, moved, 1.0 / (1.0 + r), cls, id});
      }
    }
  }
  const testsupport::ToyProvider toy(4, table);
  double standard_map = 0.0;
  const auto thresholds = coco_iou_thresholds();
  for (double t : thresholds) standard_map += ap_at_iou(standard, gts, t);
  standard_map /= static_cast<double>(thresholds.size());
  const double map_toy = map_s(preds, classes, gts, toy);
  o.expect(map_toy == standard_map, "mAP_S " + fmt(map_toy) + " vs standard mAP " + fmt(standard_map));
  for (double scale : {0.001, 3.0, 1e6}) {
    const testsupport::ToyProvider scaled(4, table, scale);
    o.expect(map_s(preds, classes, gts, scaled) == map_toy, "mAP_S changes under scale " + fmt(scale));
  }
  if (o.pass) o.detail = "cIoU 0.4 / mIoU 0.25, AP hand cases, mAP_S == mAP == " + fmt(map_toy);
  return o;
}

// ---------------------------------------------------------------- 8

Outcome router_conservation() {
  Outcome o;
  Rng rng(8008);
  const char* units[] = {"box", "mask", "keypoint"};
  for (int inst = 0; inst < 1000 && o.pass; ++inst) {
    const auto dim = uniform_int(rng, 1, 4);
    const auto groups = uniform_int(rng, 0, 6);
    std::vector<RefEmbedding> refs;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::string unit = units[uniform_int(rng, 0, 2)];
      const auto count = uniform_int(rng, 1, 5);
      for (std::size_t k = 0; k < count; ++k) {
        std::vector<double> v(dim);
        for (auto& e : v) e = uniform_real(rng, -1, 1);
        refs.push_back({v, unit, g, k, 0});
      }
    }
    std::shuffle(refs.begin(), refs.end(), rng);
    for (std::size_t i = 0; i < refs.size(); ++i) refs[i].source_position = 3 * i + 1;

    const auto batches = route_refs(refs);
    std::size_t valid = 0;
    std::map<std::size_t, std::vector<double>> recovered;
    for (const auto& [unit, batch] : batches) {
      std::vector<std::vector<double>> outputs;
      for (const auto& g : batch.groups) {
        for (std::size_t s = 0; s < batch.pad_length; ++s) {
          valid += g.validity[s];
          outputs.emplace_back(g.values.begin() + s * batch.dim, g.values.begin() + (s + 1) * batch.dim);
        }
      }
      for (auto& [pos, v] : unroute(batch, outputs)) {
        o.expect(recovered.emplace(pos, v).second, "source position " + std::to_string(pos) + " routed twice");
      }
    }
    o.expect(valid == refs.size(), "instance " + std::to_string(inst) + ": " + std::to_string(valid) + " valid slots for " +
                                       std::to_string(refs.size()) + " refs");
    o.expect(recovered.size() == refs.size(), "instance " + std::to_string(inst) + ": mapping is not a bijection");
    for (const auto& r : refs) {
      auto it = recovered.find(r.source_position);
      o.expect(it != recovered.end() && it->second == r.vector,
               "instance " + std::to_string(inst) + ": route then unroute is not the identity");
    }
  }
  if (o.pass) o.detail = "1000 instances conserved";
  return o;
}

// ---------------------------------------------------------------- 9

int run(const std::string& args) {
  const std::string cmd = std::string("\"") + TRPKIT_CLI_PATH + "\" " + args;
  const int status = std::system(cmd.c_str());
  return status == -1 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome cli_end_to_end() {
  Outcome o;
  Rng rng(9009);
  const auto anns = testsupport::random_annotations(rng, 50);
  nlohmann::json doc;
  doc["annotations"] = nlohmann::json::array();
  for (const auto& a : anns) {
    nlohmann::json regions = nlohmann::json::array();
    for (const auto& r : a.regions) {
      regions.push_back({{"label", r.label},
                         {"box", {r.box->x0, r.box->y0, r.box->x1, r.box->y1}},
                         {"mask", {{"size", {r.mask->height, r.mask->width}}, {"counts", r.mask->counts}}}});
    }
    doc["annotations"].push_back({{"image_id", a.image_id}, {"regions", regions}});
  }
  std::ofstream("acceptance_ann.json") << doc.dump(2);
  std::ofstream("acceptance_bank.json") << testsupport::default_bank().to_json().dump(2);

  // Totals straight from the annotations: one det sample per image, one
  // binding per distinct lowercase label, one box reference per region.
  std::size_t boxes = 0;
  std::map<std::size_t, std::size_t> per_binding, words;
  for (const auto& a : anns) {
    std::map<std::string, std::size_t> by_label;
    for (const auto& r : a.regions) {
      std::string l = r.label;
      for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      ++by_label[l];
      ++boxes;
    }
    for (const auto& [label, n] : by_label) {
      ++per_binding[n];
      ++words[1 + std::count(label.begin(), label.end(), ' ')];
    }
  }

  const std::string common = "build acceptance_ann.json --task det --templates acceptance_bank.json --seed 7 --out ";
  o.expect(run(common + "acceptance_a.json > /dev/null") == 0, "first build failed");
  o.expect(run(common + "acceptance_b.json > /dev/null") == 0, "second build failed");
  const auto bytes = slurp("acceptance_a.json");
  o.expect(!bytes.empty() && bytes == slurp("acceptance_b.json"), "builds with the same seed differ");
  o.expect(run("validate acceptance_a.json > /dev/null") == 0, "validate reported failures");
  o.expect(run("stats acceptance_a.json > acceptance_stats.json") == 0, "stats failed");

  try {
    const auto st = nlohmann::json::parse(slurp("acceptance_stats.json"));
    o.expect(st.at("samples") == anns.size(), "samples " + st.at("samples").dump());
    o.expect(st.at("unparsable") == 0, "unparsable answers");
    o.expect(st.at("per_task").at("det") == anns.size(), "det count " + st.at("per_task").at("det").dump());
    o.expect(st.at("refs_per_unit").at("box") == boxes,
             "box refs " + st.at("refs_per_unit").at("box").dump() + " vs " + std::to_string(boxes));
    o.expect(st.at("refs_per_unit").at("mask") == 0, "mask refs in a det corpus");
    for (const auto& [k, v] : per_binding)
      o.expect(st.at("refs_per_binding").value(std::to_string(k), 0) == v, "refs_per_binding[" + std::to_string(k) + "]");
    o.expect(st.at("refs_per_binding").size() == per_binding.size(), "refs_per_binding keys");
    for (const auto& [k, v] : words)
      o.expect(st.at("phrase_word_counts").value(std::to_string(k), 0) == v, "phrase_word_counts[" + std::to_string(k) + "]");
  } catch (const std::exception& e) {
    o.fail(std::string("stats output: ") + e.what());
  }

  for (const char* f : {"acceptance_ann.json", "acceptance_bank.json", "acceptance_a.json", "acceptance_b.json",
                        "acceptance_stats.json"})
    std::remove(f);
  if (o.pass) o.detail = "50 annotations, identical bytes, " + std::to_string(boxes) + " box refs";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"grammar round trip", grammar_round_trip},
      {"mutation detection", mutation_detection},
      {"matching oracle equivalence", matching_equivalence},
      {"invalid-mask exclusion", invalid_exclusion},
      {"aggregation numerics", aggregation_numerics},
      {"geometry", geometry},
      {"metrics", metrics},
      {"router conservation", router_conservation},
      {"cli end to end", cli_end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << " " << (o.pass ? "PASS" : "FAIL") << "  " << criteria[i].first << ": "
              << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
