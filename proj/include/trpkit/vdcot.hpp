#pragma once

// <Task> blocks that declare, before the answer, which concepts will be
// decoded, into which units, and how many instances each:
//
//   <Task>
//   Unit decode (True). Class name, target unit and number:
//   - Name: two men Unit: box Num: 2
//   </Task>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "trpkit/trp_grammar.hpp"
#include "trpkit/violation.hpp"

namespace trpkit {

struct CotEntry {
  std::string name;
  std::vector<std::string> units;  // sorted, unique
  std::size_t num = 1;

  friend bool operator==(const CotEntry&, const CotEntry&) = default;
};

struct CotBlock {
  bool decode = false;
  std::vector<CotEntry> entries;  // empty iff !decode

  friend bool operator==(const CotBlock&, const CotBlock&) = default;
};

struct CotParse {
  CotBlock block;
  /// Entries that repeated a (name, unit set) pair and were merged.
  std::vector<std::string> warnings;
};

/// Throws Error{MissingTaskTags, MalformedDecodeLine, MalformedEntryLine,
/// MultipleTaskBlocks}. Text outside the <Task> region is ignored.
CotParse parse_cot_detailed(std::string_view source);
CotBlock parse_cot(std::string_view source);

/// Canonical block text; parse_cot(emit_cot(b)) == b.
std::string emit_cot(const CotBlock& block);

struct ConsistencyReport {
  std::vector<Violation> violations;
  /// Entries satisfied by more than one triplet. Informational.
  std::vector<std::string> notices;
};

ConsistencyReport check_consistency_detailed(const CotBlock& cot, const AnswerAst& ast);
std::vector<Violation> check_consistency(const CotBlock& cot, const AnswerAst& ast);

}  // namespace trpkit
