#include "trpkit/error.hpp"

namespace trpkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnbalancedPhrase: return "UnbalancedPhrase";
    case ErrorKind::MalformedDecodeSpec: return "MalformedDecodeSpec";
    case ErrorKind::BadRefIndex: return "BadRefIndex";
    case ErrorKind::DanglingRef: return "DanglingRef";
    case ErrorKind::EmptyPhrase: return "EmptyPhrase";
    case ErrorKind::InvariantViolation: return "InvariantViolation";
    case ErrorKind::MissingTaskTags: return "MissingTaskTags";
    case ErrorKind::MalformedDecodeLine: return "MalformedDecodeLine";
    case ErrorKind::MalformedEntryLine: return "MalformedEntryLine";
    case ErrorKind::MultipleTaskBlocks: return "MultipleTaskBlocks";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NonContiguousGroup: return "NonContiguousGroup";
    case ErrorKind::PadTooSmall: return "PadTooSmall";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::InvalidBox: return "InvalidBox";
    case ErrorKind::BadRunLength: return "BadRunLength";
    case ErrorKind::MixedUnits: return "MixedUnits";
    case ErrorKind::InfeasibleAssignment: return "InfeasibleAssignment";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::EmptyPrompt: return "EmptyPrompt";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::ZeroNormEmbedding: return "ZeroNormEmbedding";
    case ErrorKind::MissingEmbedding: return "MissingEmbedding";
    case ErrorKind::MissingGeometry: return "MissingGeometry";
    case ErrorKind::EmptyTemplateBank: return "EmptyTemplateBank";
    case ErrorKind::UnreadableFile: return "UnreadableFile";
    case ErrorKind::SchemaError: return "SchemaError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

GroupError::GroupError(std::size_t group, const Error& cause)
    : Error(cause.kind(), "group " + std::to_string(group) + ": " + cause.what()), group_(group) {}

}  // namespace trpkit

#include "trpkit/violation.hpp"

namespace trpkit {

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::BadRefIndex: return "BadRefIndex";
    case ViolationKind::DuplicateUnitBinding: return "DuplicateUnitBinding";
    case ViolationKind::BadUnitName: return "BadUnitName";
    case ViolationKind::UnexpectedTriplet: return "UnexpectedTriplet";
    case ViolationKind::RefCountMismatch: return "RefCountMismatch";
    case ViolationKind::UnclaimedTriplet: return "UnclaimedTriplet";
  }
  return "Unknown";
}

}  // namespace trpkit
