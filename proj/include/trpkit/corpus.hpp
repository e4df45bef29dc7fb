#pragma once

// Instruction-tuning corpus: building samples from region annotations,
// (de)serializing corpus files, validation and statistics.
//
// Corpus file layout:
//   {"version": 1, "template_bank_hash": "<16 hex>", "samples": [
//     {"task": "det", "image_id": "...", "system": "...", "prompt": "...",
//      "cot": "<Task>...</Task>", "answer": "<Phrase>...",
//      "targets": [{"unit": "box", "regions": [[x0, y0, x1, y1], ...]},
//                  {"unit": "mask", "regions": [{"size": [H, W], "counts": [...]}]}],
//      "prompt_regions": [...], "turns": [...optional, ignored...]}]}
// targets[g] belongs to the g-th binding of the answer; its i-th region is
// the target of reference [i].

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "trpkit/geometry.hpp"

namespace trpkit {

enum class TaskKind { Det, Seg, Rec, Res, Reg, GcgBox, GcgMask, InteractiveMask };

std::string_view to_string(TaskKind task);
std::optional<TaskKind> parse_task_kind(std::string_view name);
const std::vector<TaskKind>& all_task_kinds();

struct AnnotatedRegion {
  std::string label;
  std::optional<Box> box;
  std::optional<Rle> mask;
};

struct Annotation {
  std::string image_id;
  std::vector<AnnotatedRegion> regions;
};

/// Reads {"annotations": [{"image_id": ..., "regions": [{"label": ...,
/// "box": [...], "mask": {...}}]}]}. Throws Error{UnreadableFile, SchemaError}.
std::vector<Annotation> load_annotations(const std::string& path);

struct TemplateBank {
  std::string system = "You are a helpful assistant that grounds every object it mentions.";
  std::map<std::string, std::vector<std::string>> templates;  // task name -> prompts

  /// {"system": "...", "templates": {"det": ["..."], ...}}
  static TemplateBank from_json(const nlohmann::json& j);
  static TemplateBank load(const std::string& path);
  nlohmann::json to_json() const;
  /// FNV-1a over the canonical JSON text, as 16 hex digits.
  std::string hash() const;
};

using TargetRegion = std::variant<Box, Rle>;

struct TargetGroup {
  std::string unit;
  std::vector<TargetRegion> regions;

  friend bool operator==(const TargetGroup&, const TargetGroup&) = default;
};

struct Sample {
  TaskKind task = TaskKind::Det;
  std::string image_id;
  std::string system;
  std::string prompt;
  std::string cot;
  std::string answer;
  std::vector<TargetGroup> targets;
  std::vector<TargetRegion> prompt_regions;  // visual prompts referenced by [VPT]

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct Corpus {
  int version = 1;
  std::string template_bank_hash;
  std::vector<Sample> samples;
};

/// Deterministic in (annotations, task, bank, seed).
/// Throws Error{MissingGeometry, EmptyTemplateBank, SchemaError}.
std::vector<Sample> build_samples(const std::vector<Annotation>& annotations, TaskKind task,
                                  const TemplateBank& bank, std::uint64_t seed);

nlohmann::json to_json(const Sample& s);
nlohmann::json to_json(const Corpus& c);
/// Throws Error{SchemaError}.
Sample sample_from_json(const nlohmann::json& j);
Corpus corpus_from_json(const nlohmann::json& j);

/// Stable text form of a corpus file (two-space indent, trailing newline).
std::string serialize_corpus(const Corpus& c);
/// Throws Error{UnreadableFile, SchemaError}.
Corpus read_corpus(const std::string& path);

struct Issue {
  std::size_t sample = 0;
  std::string message;

  friend bool operator==(const Issue&, const Issue&) = default;
};

struct SampleCheck {
  std::vector<std::string> violations;
  std::vector<std::string> notices;
};

/// Parses answer and CoT, checks their consistency and the alignment of
/// targets with references.
SampleCheck check_sample(const Sample& s);

struct ValidationReport {
  std::size_t samples = 0;
  std::vector<Issue> violations;  // ordered by sample index
  std::vector<Issue> notices;

  bool ok(bool strict = false) const { return violations.empty() && (!strict || notices.empty()); }
};

ValidationReport validate_corpus(const Corpus& corpus, std::size_t threads = 0);
ValidationReport validate_corpus(const std::string& path, std::size_t threads = 0);

struct CorpusStats {
  std::size_t samples = 0;
  std::size_t unparsable = 0;
  std::map<std::string, std::size_t> per_task;        // every task kind, zero included
  std::map<std::string, std::size_t> refs_per_unit;   // "box" and "mask" always present
  std::map<std::size_t, std::size_t> refs_per_binding;    // histogram
  std::map<std::size_t, std::size_t> phrase_word_counts;  // histogram over triplets
};

CorpusStats corpus_stats(const Corpus& corpus);
CorpusStats corpus_stats(const std::string& path);
nlohmann::json to_json(const CorpusStats& s);

}  // namespace trpkit
