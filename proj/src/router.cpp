#include "trpkit/router.hpp"

#include <algorithm>
#include <utility>

namespace trpkit {

std::optional<std::size_t> RoutedBatch::source_position(std::size_t group, std::size_t slot) const {
  if (group >= groups.size() || slot >= pad_length) return std::nullopt;
  const auto& g = groups[group];
  if (!g.validity[slot]) return std::nullopt;
  return g.source_positions[slot];
}

std::map<std::string, RoutedBatch> route_refs(const std::vector<RefEmbedding>& embeddings,
                                              std::optional<std::size_t> pad_length) {
  std::map<std::string, RoutedBatch> out;
  if (embeddings.empty()) return out;

  const std::size_t dim = embeddings.front().vector.size();
  std::map<std::string, std::map<std::size_t, std::vector<const RefEmbedding*>>> by_unit;
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) {
      throw Error(ErrorKind::DimensionMismatch,
                  "embedding of dimension " + std::to_string(e.vector.size()) + ", expected " + std::to_string(dim));
    }
    by_unit[e.unit][e.group_id].push_back(&e);
  }

  for (auto& [unit, groups] : by_unit) {
    std::size_t longest = 0;
    for (auto& [gid, members] : groups) {
      std::sort(members.begin(), members.end(),
                [](const RefEmbedding* a, const RefEmbedding* b) { return a->index_in_group < b->index_in_group; });
      for (std::size_t i = 0; i < members.size(); ++i) {
        if (members[i]->index_in_group != i) {
          throw Error(ErrorKind::NonContiguousGroup,
                      "unit '" + unit + "' group " + std::to_string(gid) + " is missing index " + std::to_string(i));
        }
      }
      longest = std::max(longest, members.size());
    }
    const std::size_t len = pad_length.value_or(longest);
    if (len < longest) {
      throw Error(ErrorKind::PadTooSmall, "pad length " + std::to_string(len) + " < group size " +
                                              std::to_string(longest) + " for unit '" + unit + "'");
    }

    RoutedBatch batch;
    batch.unit = unit;
    batch.pad_length = len;
    batch.dim = dim;
    for (const auto& [gid, members] : groups) {
      RoutedGroup g;
      g.group_id = gid;
      g.size = members.size();
      g.values.assign(len * dim, 0.0);
      g.validity.assign(len, false);
      g.source_positions.assign(len, 0);
      for (std::size_t i = 0; i < members.size(); ++i) {
        std::copy(members[i]->vector.begin(), members[i]->vector.end(), g.values.begin() + static_cast<std::ptrdiff_t>(i * dim));
        g.validity[i] = true;
        g.source_positions[i] = members[i]->source_position;
      }
      batch.groups.push_back(std::move(g));
    }
    out.emplace(unit, std::move(batch));
  }
  return out;
}

std::vector<RefSlot> collect_ref_slots(const AnswerAst& ast) {
  std::vector<RefSlot> out;
  std::size_t group = 0;
  for (const Triplet* t : ast.triplets()) {
    for (const auto& binding : t->bindings) {
      for (const auto& unit : binding.unit_set()) {
        for (const auto& ref : binding.refs) out.push_back({unit, group, ref.index, ref.source_position});
      }
      ++group;
    }
  }
  return out;
}

}  // namespace trpkit
