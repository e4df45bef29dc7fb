#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace trpkit {

/// Every failure the library reports. Grouped by the module that raises it.
enum class ErrorKind {
  // trp_grammar
  UnbalancedPhrase,
  MalformedDecodeSpec,
  BadRefIndex,
  DanglingRef,
  EmptyPhrase,
  InvariantViolation,
  // vdcot
  MissingTaskTags,
  MalformedDecodeLine,
  MalformedEntryLine,
  MultipleTaskBlocks,
  // router
  DimensionMismatch,
  NonContiguousGroup,
  PadTooSmall,
  ShapeMismatch,
  // geometry
  InvalidBox,
  BadRunLength,
  // matching
  MixedUnits,
  InfeasibleAssignment,
  TooLarge,
  // aggregation
  EmptyPrompt,
  // metrics
  LengthMismatch,
  EmptyDataset,
  ZeroNormEmbedding,
  MissingEmbedding,
  // corpus
  MissingGeometry,
  EmptyTemplateBank,
  UnreadableFile,
  SchemaError,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised by the grouped matcher; carries the index of the failing group.
class GroupError : public Error {
 public:
  GroupError(std::size_t group, const Error& cause);

  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

}  // namespace trpkit
