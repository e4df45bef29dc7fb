#include "trpkit/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "trpkit/error.hpp"
#include "trpkit/parallel.hpp"
#include "trpkit/trp_grammar.hpp"
#include "trpkit/vdcot.hpp"

namespace trpkit {

using nlohmann::json;

namespace {

constexpr std::pair<TaskKind, std::string_view> kTaskNames[] = {
    {TaskKind::Det, "det"},         {TaskKind::Seg, "seg"},          {TaskKind::Rec, "rec"},
    {TaskKind::Res, "res"},         {TaskKind::Reg, "reg"},          {TaskKind::GcgBox, "gcg-box"},
    {TaskKind::GcgMask, "gcg-mask"}, {TaskKind::InteractiveMask, "interactive-mask"},
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::UnreadableFile, path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
}

json region_to_json(const TargetRegion& r) {
  if (const auto* b = std::get_if<Box>(&r)) return json::array({b->x0, b->y0, b->x1, b->y1});
  const auto& m = std::get<Rle>(r);
  return json{{"size", {m.height, m.width}}, {"counts", m.counts}};
}

TargetRegion region_from_json(const json& j) {
  if (j.is_array()) {
    const auto v = j.get<std::vector<double>>();
    if (v.size() != 4) throw Error(ErrorKind::SchemaError, "box needs 4 coordinates");
    return Box{v[0], v[1], v[2], v[3]};
  }
  const auto size = j.at("size").get<std::vector<std::size_t>>();
  if (size.size() != 2) throw Error(ErrorKind::SchemaError, "mask size needs [H, W]");
  return Rle{size[0], size[1], j.at("counts").get<std::vector<std::size_t>>()};
}

std::string lowercase(std::string_view s) {
  std::string out;
  for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  auto b = out.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = out.find_last_not_of(" \t\r\n");
  return out.substr(b, e - b + 1);
}

std::string clean_label(const std::string& raw) {
  std::string label = lowercase(raw);
  if (phrase_key(label).empty()) throw Error(ErrorKind::SchemaError, "label '" + raw + "' has no text");
  for (const std::string* text : {&raw, static_cast<const std::string*>(&label)}) {
    for (const auto& tok : tokenize(*text)) {
      if (tok.kind != TokenKind::Text) throw Error(ErrorKind::SchemaError, "label '" + raw + "' contains " + tok.text);
    }
  }
  return label;
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

std::string triplet_text(const std::string& label, const std::string& unit, std::size_t refs) {
  std::string out = "<Phrase>" + label + "</Phrase>(<Unit>" + unit + "</Unit>";
  for (std::size_t i = 0; i < refs; ++i) out += "[" + std::to_string(i) + "]<REF>";
  return out + ")";
}

struct LabelGroup {
  std::string label;
  std::vector<TargetRegion> regions;
};

class Builder {
 public:
  Builder(TaskKind task, const TemplateBank& bank, std::uint64_t seed) : task_(task), bank_(bank), rng_(seed) {
    auto it = bank.templates.find(std::string(to_string(task)));
    if (it == bank.templates.end() || it->second.empty()) {
      throw Error(ErrorKind::EmptyTemplateBank, "no templates for task '" + std::string(to_string(task)) + "'");
    }
    templates_ = &it->second;
  }

  void add(const Annotation& ann, std::vector<Sample>& out) {
    switch (task_) {
      case TaskKind::Det: return add_grouped(ann, "box", false, out);
      case TaskKind::Seg: return add_grouped(ann, "mask", false, out);
      case TaskKind::GcgBox: return add_grouped(ann, "box", true, out);
      case TaskKind::GcgMask: return add_grouped(ann, "mask", true, out);
      case TaskKind::Rec: return add_per_region(ann, "box", out);
      case TaskKind::Res: return add_per_region(ann, "mask", out);
      case TaskKind::Reg: return add_region_caption(ann, out);
      case TaskKind::InteractiveMask: return add_interactive(ann, out);
    }
  }

 private:
  Sample start(const Annotation& ann) {
    Sample s;
    s.task = task_;
    s.image_id = ann.image_id;
    s.system = bank_.system;
    s.prompt = (*templates_)[rng_() % templates_->size()];
    return s;
  }

  static TargetRegion geometry(const AnnotatedRegion& r, const std::string& unit, const Annotation& ann) {
    if (unit == "box") {
      if (!r.box) throw Error(ErrorKind::MissingGeometry, ann.image_id + ": '" + r.label + "' has no box");
      return *r.box;
    }
    if (!r.mask) throw Error(ErrorKind::MissingGeometry, ann.image_id + ": '" + r.label + "' has no mask");
    return *r.mask;
  }

  void add_grouped(const Annotation& ann, const std::string& unit, bool caption, std::vector<Sample>& out) {
    std::vector<LabelGroup> groups;
    for (const auto& r : ann.regions) {
      auto label = clean_label(r.label);
      auto it = std::find_if(groups.begin(), groups.end(), [&](const LabelGroup& g) {
        return phrase_key(g.label) == phrase_key(label);
      });
      if (it == groups.end()) it = groups.insert(groups.end(), LabelGroup{label, {}});
      it->regions.push_back(geometry(r, unit, ann));
    }

    Sample s = start(ann);
    CotBlock cot;
    cot.decode = !groups.empty();
    std::vector<std::string> parts;
    for (auto& g : groups) {
      cot.entries.push_back({g.label, {unit}, g.regions.size()});
      parts.push_back(triplet_text(g.label, unit, g.regions.size()));
      s.targets.push_back({unit, std::move(g.regions)});
    }
    s.cot = emit_cot(cot);
    if (!caption) {
      if (parts.empty()) {
        s.answer = "There are no objects in the image.";
      } else {
        for (std::size_t i = 0; i < parts.size(); ++i) s.answer += (i ? ", " : "") + parts[i];
        s.answer += ".";
      }
    } else if (parts.empty()) {
      s.answer = "The image shows a scene without distinct objects.";
    } else {
      s.answer = "The image shows ";
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) s.answer += (i + 1 == parts.size()) ? " and " : ", ";
        s.answer += parts[i];
      }
      s.answer += ".";
    }
    out.push_back(std::move(s));
  }

  void add_per_region(const Annotation& ann, const std::string& unit, std::vector<Sample>& out) {
    for (const auto& r : ann.regions) {
      auto label = clean_label(r.label);
      Sample s = start(ann);
      replace_all(s.prompt, "<referring expression>", label);
      s.cot = emit_cot(CotBlock{true, {{label, {unit}, 1}}});
      s.answer = triplet_text(label, unit, 1);
      s.targets.push_back({unit, {geometry(r, unit, ann)}});
      out.push_back(std::move(s));
    }
  }

  void add_region_caption(const Annotation& ann, std::vector<Sample>& out) {
    for (const auto& r : ann.regions) {
      auto label = clean_label(r.label);
      if (!r.box && !r.mask) throw Error(ErrorKind::MissingGeometry, ann.image_id + ": '" + r.label + "'");
      Sample s = start(ann);
      replace_all(s.prompt, "<region>", surface(TokenKind::Vpt));
      s.prompt_regions.push_back(r.box ? TargetRegion{*r.box} : TargetRegion{*r.mask});
      s.cot = emit_cot(CotBlock{});
      s.answer = label;
      out.push_back(std::move(s));
    }
  }

  void add_interactive(const Annotation& ann, std::vector<Sample>& out) {
    for (const auto& r : ann.regions) {
      auto label = clean_label(r.label);
      auto target = geometry(r, "mask", ann);
      Sample s = start(ann);
      replace_all(s.prompt, "<region>", surface(TokenKind::Vpt));
      s.prompt_regions.push_back(r.box ? TargetRegion{*r.box} : target);
      s.cot = emit_cot(CotBlock{true, {{label, {"mask"}, 1}}});
      s.answer = triplet_text(label, "mask", 1);
      s.targets.push_back({"mask", {std::move(target)}});
      out.push_back(std::move(s));
    }
  }

  TaskKind task_;
  const TemplateBank& bank_;
  const std::vector<std::string>* templates_ = nullptr;
  std::mt19937_64 rng_;
};

std::string join_units(const std::vector<std::string>& units) {
  std::string out;
  for (std::size_t i = 0; i < units.size(); ++i) out += (i ? ", " : "") + units[i];
  return out;
}

void check_region(const TargetRegion& r, const std::string& unit, const std::string& where,
                  std::vector<std::string>& out) {
  if (unit == "box") {
    const auto* b = std::get_if<Box>(&r);
    if (!b) {
      out.push_back(where + ": expected a box");
    } else if (!b->valid()) {
      out.push_back(where + ": box outside [0, 1] or inverted");
    }
  } else if (unit == "mask") {
    const auto* m = std::get_if<Rle>(&r);
    if (!m) {
      out.push_back(where + ": expected a mask");
    } else {
      try {
        rle_decode(*m);
      } catch (const Error& e) {
        out.push_back(where + ": " + e.what());
      }
    }
  } else {
    out.push_back(where + ": no target geometry defined for unit '" + unit + "'");
  }
}

}  // namespace

std::string_view to_string(TaskKind task) {
  for (const auto& [k, name] : kTaskNames) {
    if (k == task) return name;
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view name) {
  for (const auto& [k, n] : kTaskNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::vector<TaskKind>& all_task_kinds() {
  static const std::vector<TaskKind> kinds = [] {
    std::vector<TaskKind> v;
    for (const auto& entry : kTaskNames) v.push_back(entry.first);
    return v;
  }();
  return kinds;
}

std::vector<Annotation> load_annotations(const std::string& path) {
  const json doc = read_json_file(path);
  std::vector<Annotation> out;
  try {
    for (const auto& a : doc.at("annotations")) {
      Annotation ann;
      ann.image_id = a.at("image_id").get<std::string>();
      for (const auto& r : a.value("regions", json::array())) {
        AnnotatedRegion region;
        region.label = r.at("label").get<std::string>();
        if (r.contains("box")) {
          const auto v = r.at("box").get<std::vector<double>>();
          if (v.size() != 4) throw Error(ErrorKind::SchemaError, "box needs 4 coordinates");
          region.box = Box::checked(v[0], v[1], v[2], v[3]);
        }
        if (r.contains("mask")) {
          region.mask = std::get<Rle>(region_from_json(r.at("mask")));
          rle_decode(*region.mask);
        }
        if (!region.box && !region.mask) {
          throw Error(ErrorKind::SchemaError, ann.image_id + ": region '" + region.label + "' has no geometry");
        }
        ann.regions.push_back(std::move(region));
      }
      out.push_back(std::move(ann));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  } catch (const std::bad_variant_access&) {
    throw Error(ErrorKind::SchemaError, path + ": mask must be an object with size and counts");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SchemaError) throw;
    throw Error(ErrorKind::SchemaError, path + ": " + e.what());
  }
  return out;
}

TemplateBank TemplateBank::from_json(const json& j) {
  TemplateBank bank;
  try {
    if (j.contains("system")) bank.system = j.at("system").get<std::string>();
    bank.templates = j.at("templates").get<std::map<std::string, std::vector<std::string>>>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, std::string("template bank: ") + e.what());
  }
  return bank;
}

TemplateBank TemplateBank::load(const std::string& path) { return from_json(read_json_file(path)); }

json TemplateBank::to_json() const { return json{{"system", system}, {"templates", templates}}; }

std::string TemplateBank::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : to_json().dump()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::vector<Sample> build_samples(const std::vector<Annotation>& annotations, TaskKind task,
                                  const TemplateBank& bank, std::uint64_t seed) {
  Builder builder(task, bank, seed);
  std::vector<Sample> out;
  for (const auto& ann : annotations) builder.add(ann, out);
  return out;
}

json to_json(const Sample& s) {
  json targets = json::array();
  for (const auto& g : s.targets) {
    json regions = json::array();
    for (const auto& r : g.regions) regions.push_back(region_to_json(r));
    targets.push_back({{"unit", g.unit}, {"regions", regions}});
  }
  json prompt_regions = json::array();
  for (const auto& r : s.prompt_regions) prompt_regions.push_back(region_to_json(r));
  return json{{"task", to_string(s.task)}, {"image_id", s.image_id}, {"system", s.system},
              {"prompt", s.prompt},        {"cot", s.cot},           {"answer", s.answer},
              {"targets", targets},        {"prompt_regions", prompt_regions}};
}

json to_json(const Corpus& c) {
  json samples = json::array();
  for (const auto& s : c.samples) samples.push_back(to_json(s));
  return json{{"version", c.version}, {"template_bank_hash", c.template_bank_hash}, {"samples", samples}};
}

Sample sample_from_json(const json& j) {
  try {
    Sample s;
    const auto task = j.at("task").get<std::string>();
    auto kind = parse_task_kind(task);
    if (!kind) throw Error(ErrorKind::SchemaError, "unknown task '" + task + "'");
    s.task = *kind;
    s.image_id = j.at("image_id").get<std::string>();
    s.system = j.at("system").get<std::string>();
    s.prompt = j.at("prompt").get<std::string>();
    s.cot = j.at("cot").get<std::string>();
    s.answer = j.at("answer").get<std::string>();
    for (const auto& g : j.at("targets")) {
      TargetGroup group{g.at("unit").get<std::string>(), {}};
      for (const auto& r : g.at("regions")) group.regions.push_back(region_from_json(r));
      s.targets.push_back(std::move(group));
    }
    for (const auto& r : j.value("prompt_regions", json::array())) s.prompt_regions.push_back(region_from_json(r));
    if (j.contains("turns") && !j.at("turns").is_array()) throw Error(ErrorKind::SchemaError, "turns must be an array");
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

Corpus corpus_from_json(const json& j) {
  try {
    Corpus c;
    c.version = j.at("version").get<int>();
    if (c.version != 1) throw Error(ErrorKind::SchemaError, "unsupported corpus version " + std::to_string(c.version));
    c.template_bank_hash = j.at("template_bank_hash").get<std::string>();
    const auto& samples = j.at("samples");
    if (!samples.is_array()) throw Error(ErrorKind::SchemaError, "samples must be an array");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      try {
        c.samples.push_back(sample_from_json(samples[i]));
      } catch (const Error& e) {
        throw Error(ErrorKind::SchemaError, "sample " + std::to_string(i) + ": " + e.what());
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::SchemaError, e.what());
  }
}

std::string serialize_corpus(const Corpus& c) { return to_json(c).dump(2) + "\n"; }

Corpus read_corpus(const std::string& path) { return corpus_from_json(read_json_file(path)); }

SampleCheck check_sample(const Sample& s) {
  SampleCheck out;
  AnswerAst ast;
  CotParse cot;
  try {
    ast = parse_answer(s.answer);
  } catch (const Error& e) {
    out.violations.push_back(std::string("answer: ") + e.what());
    return out;
  }
  try {
    cot = parse_cot_detailed(s.cot);
  } catch (const Error& e) {
    out.violations.push_back(std::string("cot: ") + e.what());
    return out;
  }
  for (const auto& w : cot.warnings) out.notices.push_back("cot: " + w);
  for (const auto& v : validate_triplets(ast)) {
    out.violations.push_back("answer: " + std::string(to_string(v.kind)) + ": " + v.message);
  }
  const auto report = check_consistency_detailed(cot.block, ast);
  for (const auto& v : report.violations) {
    out.violations.push_back("consistency: " + std::string(to_string(v.kind)) + ": " + v.message);
  }
  for (const auto& n : report.notices) out.notices.push_back("consistency: " + n);

  std::vector<const UnitBinding*> bindings;
  for (const Triplet* t : ast.triplets()) {
    for (const auto& b : t->bindings) bindings.push_back(&b);
  }
  if (bindings.size() != s.targets.size()) {
    out.violations.push_back("targets: " + std::to_string(s.targets.size()) + " groups for " +
                             std::to_string(bindings.size()) + " bindings");
    return out;
  }
  for (std::size_t g = 0; g < bindings.size(); ++g) {
    const auto units = join_units(bindings[g]->unit_set());
    const auto& group = s.targets[g];
    const std::string where = "targets[" + std::to_string(g) + "]";
    if (group.unit != units) {
      out.violations.push_back(where + ": unit '" + group.unit + "' but binding decodes '" + units + "'");
      continue;
    }
    if (group.regions.size() != bindings[g]->refs.size()) {
      out.violations.push_back(where + ": " + std::to_string(group.regions.size()) + " regions for " +
                               std::to_string(bindings[g]->refs.size()) + " references");
      continue;
    }
    for (std::size_t i = 0; i < group.regions.size(); ++i) {
      check_region(group.regions[i], group.unit, where + "[" + std::to_string(i) + "]", out.violations);
    }
  }
  return out;
}

ValidationReport validate_corpus(const Corpus& corpus, std::size_t threads) {
  std::vector<SampleCheck> checks(corpus.samples.size());
  parallel_for(corpus.samples.size(), threads, [&](std::size_t i) { checks[i] = check_sample(corpus.samples[i]); });
  ValidationReport report;
  report.samples = corpus.samples.size();
  for (std::size_t i = 0; i < checks.size(); ++i) {
    for (auto& v : checks[i].violations) report.violations.push_back({i, std::move(v)});
    for (auto& n : checks[i].notices) report.notices.push_back({i, std::move(n)});
  }
  return report;
}

ValidationReport validate_corpus(const std::string& path, std::size_t threads) {
  return validate_corpus(read_corpus(path), threads);
}

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats st;
  for (TaskKind k : all_task_kinds()) st.per_task[std::string(to_string(k))] = 0;
  st.refs_per_unit["box"] = 0;
  st.refs_per_unit["mask"] = 0;
  for (const auto& s : corpus.samples) {
    ++st.samples;
    ++st.per_task[std::string(to_string(s.task))];
    AnswerAst ast;
    try {
      ast = parse_answer(s.answer);
    } catch (const Error&) {
      ++st.unparsable;
      continue;
    }
    for (const Triplet* t : ast.triplets()) {
      const auto text = t->phrase.normalized_text();
      const auto words = static_cast<std::size_t>(std::count(text.begin(), text.end(), ' ')) + 1;
      ++st.phrase_word_counts[words];
      for (const auto& b : t->bindings) {
        ++st.refs_per_binding[b.refs.size()];
        for (const auto& u : b.unit_set()) st.refs_per_unit[u] += b.refs.size();
      }
    }
  }
  return st;
}

CorpusStats corpus_stats(const std::string& path) { return corpus_stats(read_corpus(path)); }

json to_json(const CorpusStats& s) {
  auto histogram = [](const std::map<std::size_t, std::size_t>& h) {
    json out = json::object();
    for (const auto& [k, v] : h) out[std::to_string(k)] = v;
    return out;
  };
  return json{{"samples", s.samples},
              {"unparsable", s.unparsable},
              {"per_task", s.per_task},
              {"refs_per_unit", s.refs_per_unit},
              {"refs_per_binding", histogram(s.refs_per_binding)},
              {"phrase_word_counts", histogram(s.phrase_word_counts)}};
}

}  // namespace trpkit
