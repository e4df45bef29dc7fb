#pragma once

// Latent embeddings router: splits <REF> embeddings by unit, groups them by
// the binding they came from, and pads each group to a rectangular batch
// with a validity mask. unroute() maps decoder outputs back to the answer.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trpkit/error.hpp"
#include "trpkit/trp_grammar.hpp"

namespace trpkit {

struct RefEmbedding {
  std::vector<double> vector;
  std::string unit;
  std::size_t group_id = 0;
  std::size_t index_in_group = 0;
  std::size_t source_position = 0;
};

struct RoutedGroup {
  std::size_t group_id = 0;
  std::size_t size = 0;                       // valid slots; they come first
  std::vector<double> values;                 // pad_length x dim, row-major; padding is zero
  std::vector<bool> validity;                 // pad_length
  std::vector<std::size_t> source_positions;  // pad_length; read only where valid
};

struct RoutedBatch {
  std::string unit;
  std::size_t pad_length = 0;
  std::size_t dim = 0;
  std::vector<RoutedGroup> groups;  // ascending group_id

  std::size_t slot_count() const { return groups.size() * pad_length; }
  /// Source position of a slot, or nullopt for padding.
  std::optional<std::size_t> source_position(std::size_t group, std::size_t slot) const;
};

/// Throws Error{DimensionMismatch, NonContiguousGroup, PadTooSmall}.
/// Without `pad_length`, each unit pads to its own largest group.
std::map<std::string, RoutedBatch> route_refs(const std::vector<RefEmbedding>& embeddings,
                                              std::optional<std::size_t> pad_length = std::nullopt);

/// Decoder outputs, one per slot in group-major order, keyed back by source
/// position. Padding slots are dropped. Throws Error{ShapeMismatch}.
template <class T>
std::map<std::size_t, T> unroute(const RoutedBatch& batch, const std::vector<T>& per_slot_outputs) {
  if (per_slot_outputs.size() != batch.slot_count()) {
    throw Error(ErrorKind::ShapeMismatch, "expected " + std::to_string(batch.slot_count()) + " outputs, got " +
                                              std::to_string(per_slot_outputs.size()));
  }
  std::map<std::size_t, T> out;
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    for (std::size_t s = 0; s < batch.pad_length; ++s) {
      if (auto pos = batch.source_position(g, s)) out.emplace(*pos, per_slot_outputs[g * batch.pad_length + s]);
    }
  }
  return out;
}

/// One routing slot per (reference, unit) in an answer. Group ids number the
/// bindings in answer order; composite bindings yield one slot per unit.
struct RefSlot {
  std::string unit;
  std::size_t group_id = 0;
  std::size_t index_in_group = 0;
  std::size_t source_position = 0;
};

std::vector<RefSlot> collect_ref_slots(const AnswerAst& ast);

}  // namespace trpkit
