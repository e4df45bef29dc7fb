#pragma once

// Tokenizer, parser, emitter and validator for answers written as
// referring triplets:
//
//   <Phrase>two men</Phrase>(<Unit>box</Unit>[0]<REF>[1]<REF>)
//
// A triplet is a phrase, the unit set it decodes to, and one indexed <REF>
// per target instance. Phrases may nest; a triplet may carry several
// comma-separated bindings inside one parenthesis pair.

#include <cstddef>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "trpkit/indirect.hpp"
#include "trpkit/violation.hpp"

namespace trpkit {

enum class TokenKind {
  PhraseOpen,
  PhraseClose,
  UnitOpen,
  UnitClose,
  Ref,
  TaskOpen,
  TaskClose,
  Vpt,
  Pad,
  ImagePlaceholder,
  Text,
};

/// Exact surface form of a special token. Empty for TokenKind::Text.
std::string_view surface(TokenKind kind);

struct Token {
  TokenKind kind;
  std::string text;      // surface for special tokens, the run for Text
  std::size_t offset;    // byte offset in the source

  friend bool operator==(const Token&, const Token&) = default;
};

/// Lossless split of `source` into special tokens and text runs. Special
/// tokens are matched greedily against the closed table; anything else,
/// including near-misses such as "<REFX>", stays text.
std::vector<Token> tokenize(std::string_view source);

struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct PhraseNode;
using PhraseChild = std::variant<std::string, Indirect<PhraseNode>>;

struct PhraseNode {
  std::vector<PhraseChild> children;
  Span span;  // not part of structural equality

  /// Raw concatenation of all text, nested phrases included.
  std::string text() const;
  /// Lowercased, whitespace-collapsed text.
  std::string normalized_text() const;

  friend bool operator==(const PhraseNode& a, const PhraseNode& b) { return a.children == b.children; }
};

struct RefToken {
  std::size_t index = 0;
  std::size_t source_position = 0;  // token offset; not part of equality

  friend bool operator==(const RefToken& a, const RefToken& b) { return a.index == b.index; }
};

struct UnitBinding {
  std::vector<std::string> units;
  std::vector<RefToken> refs;

  /// Sorted, de-duplicated unit names.
  std::vector<std::string> unit_set() const;

  friend bool operator==(const UnitBinding&, const UnitBinding&) = default;
};

struct Triplet {
  PhraseNode phrase;
  std::vector<UnitBinding> bindings;

  friend bool operator==(const Triplet&, const Triplet&) = default;
};

using Segment = std::variant<std::string, Triplet>;

struct AnswerAst {
  std::vector<Segment> segments;

  std::vector<const Triplet*> triplets() const;

  friend bool operator==(const AnswerAst&, const AnswerAst&) = default;
};

enum class ParseMode {
  Strict,   // reject bindings whose indices are not 0..k-1
  Lenient,  // keep them so validate_triplets can report them
};

/// Throws Error{UnbalancedPhrase, MalformedDecodeSpec, BadRefIndex,
/// DanglingRef, EmptyPhrase}.
AnswerAst parse_answer(std::string_view source, ParseMode mode = ParseMode::Strict);

/// Canonical text for an AST. Throws Error{InvariantViolation} when the AST
/// could not have come out of parse_answer.
std::string emit_answer(const AnswerAst& ast);

/// emit_answer(parse_answer(source)).
std::string canonicalize(std::string_view source);

std::vector<Violation> validate_triplets(const AnswerAst& ast);

/// Key used to match phrases against declared concept names: lowercase,
/// punctuation removed, whitespace collapsed, and a trailing plural "s"
/// folded on words longer than three letters ("caps" -> "cap", but "glass"
/// and "bus" are kept).
std::string phrase_key(std::string_view text);

}  // namespace trpkit
