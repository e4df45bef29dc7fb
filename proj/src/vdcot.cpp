#include "trpkit/vdcot.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>
#include <utility>

#include "trpkit/error.hpp"

namespace trpkit {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_units(const std::string& list) {
  std::vector<std::string> units;
  if (trim(list).ends_with(',')) throw Error(ErrorKind::MalformedEntryLine, "empty unit in '" + list + "'");
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto u = trim(item);
    if (u.empty()) throw Error(ErrorKind::MalformedEntryLine, "empty unit in '" + list + "'");
    units.push_back(std::move(u));
  }
  if (units.empty()) throw Error(ErrorKind::MalformedEntryLine, "no units in '" + list + "'");
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());
  return units;
}

std::string join(const std::vector<std::string>& v, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace

CotParse parse_cot_detailed(std::string_view source) {
  auto tokens = tokenize(source);
  std::size_t opens = 0;
  std::size_t closes = 0;
  std::size_t begin = 0;
  std::size_t end = 0;
  for (const auto& t : tokens) {
    if (t.kind == TokenKind::TaskOpen) {
      if (++opens == 1) begin = t.offset + t.text.size();
    } else if (t.kind == TokenKind::TaskClose) {
      if (++closes == 1) end = t.offset;
    }
  }
  if (opens > 1 || closes > 1) throw Error(ErrorKind::MultipleTaskBlocks, "more than one <Task> region");
  if (opens == 0 || closes == 0 || end < begin) throw Error(ErrorKind::MissingTaskTags, "no <Task>...</Task> region");

  static const std::regex decode_line(R"(^Unit decode \((True|False)\)\.(.*)$)");
  static const std::regex entry_line(R"(^-\s*Name:\s*(.*?)\s+Unit:\s*(.*?)\s+Num:\s*(\d+)\s*$)");

  CotParse result;
  std::map<std::pair<std::string, std::vector<std::string>>, std::size_t> seen;
  bool have_decode = false;
  std::stringstream body{std::string(source.substr(begin, end - begin))};
  std::string raw;
  while (std::getline(body, raw)) {
    auto line = trim(raw);
    if (line.empty()) continue;
    std::smatch m;
    if (!have_decode) {
      if (!std::regex_match(line, m, decode_line)) {
        throw Error(ErrorKind::MalformedDecodeLine, "expected 'Unit decode (True|False).', got '" + line + "'");
      }
      result.block.decode = m[1] == "True";
      have_decode = true;
      continue;
    }
    if (!result.block.decode || !std::regex_match(line, m, entry_line)) {
      throw Error(ErrorKind::MalformedEntryLine, "unexpected line '" + line + "'");
    }
    CotEntry entry;
    entry.name = m[1];
    entry.units = split_units(m[2]);
    try {
      entry.num = std::stoull(m[3]);
    } catch (const std::out_of_range&) {
      throw Error(ErrorKind::MalformedEntryLine, "count out of range in '" + line + "'");
    }
    if (entry.name.empty() || entry.num == 0) throw Error(ErrorKind::MalformedEntryLine, "bad entry '" + line + "'");

    auto key = std::make_pair(phrase_key(entry.name), entry.units);
    if (auto it = seen.find(key); it != seen.end()) {
      result.block.entries[it->second].num += entry.num;
      result.warnings.push_back("merged duplicate entry '" + entry.name + "'");
      continue;
    }
    seen.emplace(std::move(key), result.block.entries.size());
    result.block.entries.push_back(std::move(entry));
  }
  if (!have_decode) throw Error(ErrorKind::MalformedDecodeLine, "missing 'Unit decode' line");
  if (result.block.decode && result.block.entries.empty()) {
    throw Error(ErrorKind::MalformedEntryLine, "'Unit decode (True)' without entries");
  }
  return result;
}

CotBlock parse_cot(std::string_view source) { return parse_cot_detailed(source).block; }

std::string emit_cot(const CotBlock& block) {
  std::string out = "<Task>\n";
  if (!block.decode) {
    out += "Unit decode (False).\n";
  } else {
    out += "Unit decode (True). Class name, target unit and number:\n";
    for (const auto& e : block.entries) {
      out += "- Name: " + e.name + " Unit: " + join(e.units, ", ") + " Num: " + std::to_string(e.num) + "\n";
    }
  }
  out += "</Task>";
  return out;
}

ConsistencyReport check_consistency_detailed(const CotBlock& cot, const AnswerAst& ast) {
  ConsistencyReport report;
  auto triplets = ast.triplets();

  if (!cot.decode) {
    for (std::size_t i = 0; i < triplets.size(); ++i) {
      report.violations.push_back({ViolationKind::UnexpectedTriplet, "decode is False but answer has a triplet", i});
    }
    return report;
  }

  struct Tally {
    std::size_t refs = 0;
    std::vector<std::size_t> triplets;
  };
  std::vector<Tally> tallies(cot.entries.size());
  std::vector<std::string> entry_keys;
  for (const auto& e : cot.entries) entry_keys.push_back(phrase_key(e.name));

  for (std::size_t ti = 0; ti < triplets.size(); ++ti) {
    const auto key = phrase_key(triplets[ti]->phrase.text());
    for (const auto& binding : triplets[ti]->bindings) {
      const auto units = binding.unit_set();
      bool claimed = false;
      for (std::size_t ei = 0; ei < cot.entries.size(); ++ei) {
        if (entry_keys[ei] != key || cot.entries[ei].units != units) continue;
        claimed = true;
        tallies[ei].refs += binding.refs.size();
        if (std::find(tallies[ei].triplets.begin(), tallies[ei].triplets.end(), ti) == tallies[ei].triplets.end()) {
          tallies[ei].triplets.push_back(ti);
        }
      }
      if (!claimed) {
        report.violations.push_back({ViolationKind::UnclaimedTriplet,
                                     "'" + triplets[ti]->phrase.text() + "' <Unit>" + join(units, ", ") +
                                         "</Unit> has no matching entry",
                                     ti});
      }
    }
  }

  for (std::size_t ei = 0; ei < cot.entries.size(); ++ei) {
    const auto& e = cot.entries[ei];
    if (tallies[ei].refs != e.num) {
      report.violations.push_back({ViolationKind::RefCountMismatch,
                                   "'" + e.name + "': expected " + std::to_string(e.num) + ", got " +
                                       std::to_string(tallies[ei].refs),
                                   std::nullopt});
    }
    if (tallies[ei].triplets.size() > 1) {
      report.notices.push_back("'" + e.name + "' is satisfied by " + std::to_string(tallies[ei].triplets.size()) +
                               " triplets");
    }
  }
  return report;
}

std::vector<Violation> check_consistency(const CotBlock& cot, const AnswerAst& ast) {
  return check_consistency_detailed(cot, ast).violations;
}

}  // namespace trpkit
