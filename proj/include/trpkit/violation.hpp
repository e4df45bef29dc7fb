#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace trpkit {

/// Non-fatal findings from the grammar and consistency checkers.
enum class ViolationKind {
  BadRefIndex,
  DuplicateUnitBinding,
  BadUnitName,
  UnexpectedTriplet,
  RefCountMismatch,
  UnclaimedTriplet,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string message;
  /// Ordinal of the offending triplet in the answer, when one applies.
  std::optional<std::size_t> triplet;

  friend bool operator==(const Violation&, const Violation&) = default;
};

}  // namespace trpkit
