#include "trpkit/trp_grammar.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <optional>
#include <set>
#include <utility>

#include "trpkit/error.hpp"

namespace trpkit {

namespace {

constexpr std::array<std::pair<TokenKind, std::string_view>, 10> kTokenTable{{
    {TokenKind::PhraseOpen, "<Phrase>"},
    {TokenKind::PhraseClose, "</Phrase>"},
    {TokenKind::UnitOpen, "<Unit>"},
    {TokenKind::UnitClose, "</Unit>"},
    {TokenKind::Ref, "<REF>"},
    {TokenKind::TaskOpen, "<Task>"},
    {TokenKind::TaskClose, "</Task>"},
    {TokenKind::Vpt, "[VPT]"},
    {TokenKind::Pad, "[PAD]"},
    {TokenKind::ImagePlaceholder, "<image>"},
}};

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool is_structural(TokenKind k) {
  return k == TokenKind::PhraseOpen || k == TokenKind::PhraseClose || k == TokenKind::UnitOpen ||
         k == TokenKind::UnitClose || k == TokenKind::Ref;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_lower(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

// Walks a token stream character by character inside text runs while still
// seeing special tokens as atomic units. Decode-specs are spread over both.
class Cursor {
 public:
  explicit Cursor(const std::vector<Token>& tokens) : tokens_(tokens) {}

  bool eof() const { return ti_ >= tokens_.size(); }

  const Token& token() const { return tokens_[ti_]; }
  std::size_t token_index() const { return ti_; }

  std::optional<TokenKind> special() const {
    if (eof() || token().kind == TokenKind::Text) return std::nullopt;
    return token().kind;
  }

  std::optional<char> peek_char() const {
    if (eof() || token().kind != TokenKind::Text) return std::nullopt;
    return token().text[ci_];
  }

  void advance_char() {
    if (++ci_ >= token().text.size()) {
      ++ti_;
      ci_ = 0;
    }
  }

  void advance_token() {
    ++ti_;
    ci_ = 0;
  }

  // Remainder of the current text run, consuming it.
  std::string take_text() {
    std::string out = token().text.substr(ci_);
    advance_token();
    return out;
  }

  std::size_t offset() const {
    if (eof()) return tokens_.empty() ? 0 : tokens_.back().offset + tokens_.back().text.size();
    return token().offset + ci_;
  }

  void skip_space() {
    while (auto c = peek_char()) {
      if (!is_space(*c)) break;
      advance_char();
    }
  }

  bool accept_char(char want) {
    skip_space();
    if (peek_char() == want) {
      advance_char();
      return true;
    }
    return false;
  }

 private:
  const std::vector<Token>& tokens_;
  std::size_t ti_ = 0;
  std::size_t ci_ = 0;
};

class Parser {
 public:
  Parser(const std::vector<Token>& tokens, ParseMode mode) : cur_(tokens), mode_(mode) {}

  AnswerAst parse() {
    AnswerAst ast;
    std::string text;
    auto flush = [&] {
      if (!text.empty()) ast.segments.emplace_back(std::move(text));
      text.clear();
    };
    while (!cur_.eof()) {
      auto kind = cur_.special();
      if (!kind) {
        text += cur_.take_text();
        continue;
      }
      switch (*kind) {
        case TokenKind::PhraseOpen: {
          flush();
          Triplet t;
          t.phrase = parse_phrase();
          cur_.skip_space();
          if (cur_.peek_char() != '(') fail(ErrorKind::MalformedDecodeSpec, "phrase not followed by '('");
          t.bindings = parse_decode_spec();
          ast.segments.emplace_back(std::move(t));
          break;
        }
        case TokenKind::PhraseClose:
          fail(ErrorKind::UnbalancedPhrase, "</Phrase> without matching <Phrase>");
        case TokenKind::Ref:
          fail(ErrorKind::DanglingRef, "<REF> outside a decode-spec");
        case TokenKind::UnitOpen:
        case TokenKind::UnitClose:
          fail(ErrorKind::MalformedDecodeSpec, "unit tag outside a decode-spec");
        default:
          text += cur_.token().text;
          cur_.advance_token();
      }
    }
    flush();
    return ast;
  }

 private:
  [[noreturn]] void fail(ErrorKind kind, const std::string& what) const {
    throw Error(kind, what + " at offset " + std::to_string(cur_.offset()));
  }

  PhraseNode parse_phrase() {
    PhraseNode node;
    node.span.begin = cur_.offset();
    cur_.advance_token();  // <Phrase>
    std::string text;
    auto flush = [&] {
      if (!text.empty()) node.children.emplace_back(std::move(text));
      text.clear();
    };
    for (;;) {
      if (cur_.eof()) fail(ErrorKind::UnbalancedPhrase, "<Phrase> never closed");
      auto kind = cur_.special();
      if (!kind) {
        text += cur_.take_text();
        continue;
      }
      if (*kind == TokenKind::PhraseClose) {
        cur_.advance_token();
        break;
      }
      switch (*kind) {
        case TokenKind::PhraseOpen:
          flush();
          node.children.emplace_back(Indirect<PhraseNode>(parse_phrase()));
          break;
        case TokenKind::Ref:
          fail(ErrorKind::DanglingRef, "<REF> inside a phrase");
        case TokenKind::UnitOpen:
        case TokenKind::UnitClose:
          fail(ErrorKind::UnbalancedPhrase, "<Phrase> not closed before a unit tag");
        default:
          text += cur_.token().text;
          cur_.advance_token();
      }
    }
    flush();
    node.span.end = cur_.offset();
    if (node.normalized_text().empty()) fail(ErrorKind::EmptyPhrase, "phrase has no text");
    return node;
  }

  std::vector<UnitBinding> parse_decode_spec() {
    std::vector<UnitBinding> bindings;
    cur_.advance_char();  // '('
    parse_items(bindings);
    if (!cur_.accept_char(')')) fail(ErrorKind::MalformedDecodeSpec, "decode-spec missing ')'");
    return bindings;
  }

  // item := binding | '(' item (',' item)* ')'
  void parse_items(std::vector<UnitBinding>& out) {
    for (;;) {
      if (cur_.accept_char('(')) {
        parse_items(out);
        if (!cur_.accept_char(')')) fail(ErrorKind::MalformedDecodeSpec, "unclosed '(' in decode-spec");
      } else {
        out.push_back(parse_binding());
      }
      if (!cur_.accept_char(',')) return;
    }
  }

  UnitBinding parse_binding() {
    UnitBinding b;
    cur_.skip_space();
    if (cur_.special() != TokenKind::UnitOpen) fail(ErrorKind::MalformedDecodeSpec, "expected <Unit>");
    cur_.advance_token();
    std::string list;
    while (cur_.special() != TokenKind::UnitClose) {
      if (cur_.eof() || cur_.special()) fail(ErrorKind::MalformedDecodeSpec, "expected </Unit>");
      list += cur_.take_text();
    }
    cur_.advance_token();
    std::size_t start = 0;
    for (;;) {
      auto comma = list.find(',', start);
      auto name = trim(std::string_view(list).substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (name.empty()) fail(ErrorKind::MalformedDecodeSpec, "empty unit name");
      b.units.push_back(std::move(name));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    while (cur_.accept_char('[')) {
      cur_.skip_space();
      std::size_t value = 0;
      bool any = false;
      while (auto c = cur_.peek_char()) {
        if (!std::isdigit(static_cast<unsigned char>(*c))) break;
        std::size_t next = value * 10 + static_cast<std::size_t>(*c - '0');
        if (next / 10 != value) fail(ErrorKind::MalformedDecodeSpec, "reference index overflow");
        value = next;
        any = true;
        cur_.advance_char();
      }
      if (!any) fail(ErrorKind::MalformedDecodeSpec, "expected reference index");
      if (!cur_.accept_char(']')) fail(ErrorKind::MalformedDecodeSpec, "expected ']'");
      cur_.skip_space();
      if (cur_.special() != TokenKind::Ref) fail(ErrorKind::MalformedDecodeSpec, "index not followed by <REF>");
      if (mode_ == ParseMode::Strict && value != b.refs.size()) {
        fail(ErrorKind::BadRefIndex,
             "expected [" + std::to_string(b.refs.size()) + "], found [" + std::to_string(value) + "]");
      }
      b.refs.push_back(RefToken{value, cur_.token_index()});
      cur_.advance_token();
    }
    if (b.refs.empty()) fail(ErrorKind::MalformedDecodeSpec, "binding has no references");
    return b;
  }

  Cursor cur_;
  ParseMode mode_;
};

void append_text(const PhraseNode& node, std::string& out) {
  for (const auto& child : node.children) {
    if (const auto* s = std::get_if<std::string>(&child)) {
      out += *s;
    } else {
      append_text(*std::get<Indirect<PhraseNode>>(child), out);
    }
  }
}

[[noreturn]] void invariant(const std::string& what) { throw Error(ErrorKind::InvariantViolation, what); }

void check_text(std::string_view text) {
  if (text.empty()) invariant("empty text segment");
  for (const auto& tok : tokenize(text)) {
    if (is_structural(tok.kind)) invariant("text segment contains " + tok.text);
  }
}

bool valid_unit_name(std::string_view u) {
  if (u.empty()) return false;
  return std::all_of(u.begin(), u.end(), [](char c) {
    auto uc = static_cast<unsigned char>(c);
    return !is_space(c) && !std::isupper(uc) && std::string_view(",<>[]()").find(c) == std::string_view::npos;
  });
}

void emit_phrase(const PhraseNode& node, std::string& out) {
  out += "<Phrase>";
  bool prev_text = false;
  for (const auto& child : node.children) {
    if (const auto* s = std::get_if<std::string>(&child)) {
      if (prev_text) invariant("adjacent text segments in phrase");
      check_text(*s);
      out += *s;
      prev_text = true;
    } else {
      emit_phrase(*std::get<Indirect<PhraseNode>>(child), out);
      prev_text = false;
    }
  }
  out += "</Phrase>";
  if (node.normalized_text().empty()) invariant("phrase has no text");
}

void emit_binding(const UnitBinding& b, std::string& out) {
  if (b.units.empty()) invariant("binding without units");
  if (b.refs.empty()) invariant("binding without references");
  out += "<Unit>";
  for (std::size_t i = 0; i < b.units.size(); ++i) {
    if (!valid_unit_name(b.units[i])) invariant("bad unit name '" + b.units[i] + "'");
    if (i) out += ", ";
    out += b.units[i];
  }
  out += "</Unit>";
  for (std::size_t i = 0; i < b.refs.size(); ++i) {
    if (b.refs[i].index != i) invariant("reference indices not contiguous from 0");
    out += "[" + std::to_string(i) + "]<REF>";
  }
}

}  // namespace

std::string_view surface(TokenKind kind) {
  for (const auto& [k, s] : kTokenTable) {
    if (k == kind) return s;
  }
  return {};
}

std::vector<Token> tokenize(std::string_view source) {
  std::vector<Token> out;
  std::size_t run_start = 0;
  std::size_t i = 0;
  auto flush = [&](std::size_t end) {
    if (end > run_start) out.push_back({TokenKind::Text, std::string(source.substr(run_start, end - run_start)), run_start});
  };
  while (i < source.size()) {
    if (source[i] == '<' || source[i] == '[') {
      const std::pair<TokenKind, std::string_view>* best = nullptr;
      for (const auto& entry : kTokenTable) {
        if (source.substr(i).starts_with(entry.second) && (!best || entry.second.size() > best->second.size())) {
          best = &entry;
        }
      }
      if (best) {
        flush(i);
        out.push_back({best->first, std::string(best->second), i});
        i += best->second.size();
        run_start = i;
        continue;
      }
    }
    ++i;
  }
  flush(source.size());
  return out;
}

std::string PhraseNode::text() const {
  std::string out;
  append_text(*this, out);
  return out;
}

std::string PhraseNode::normalized_text() const { return collapse_lower(text()); }

std::vector<std::string> UnitBinding::unit_set() const {
  std::vector<std::string> s = units;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  return s;
}

std::vector<const Triplet*> AnswerAst::triplets() const {
  std::vector<const Triplet*> out;
  for (const auto& seg : segments) {
    if (const auto* t = std::get_if<Triplet>(&seg)) out.push_back(t);
  }
  return out;
}

AnswerAst parse_answer(std::string_view source, ParseMode mode) {
  auto tokens = tokenize(source);
  return Parser(tokens, mode).parse();
}

std::string emit_answer(const AnswerAst& ast) {
  std::string out;
  bool prev_text = false;
  for (const auto& seg : ast.segments) {
    if (const auto* s = std::get_if<std::string>(&seg)) {
      if (prev_text) invariant("adjacent text segments");
      check_text(*s);
      out += *s;
      prev_text = true;
      continue;
    }
    prev_text = false;
    const auto& t = std::get<Triplet>(seg);
    if (t.bindings.empty()) invariant("triplet without bindings");
    emit_phrase(t.phrase, out);
    out += "(";
    for (std::size_t i = 0; i < t.bindings.size(); ++i) {
      if (i) out += ", ";
      emit_binding(t.bindings[i], out);
    }
    out += ")";
  }
  return out;
}

std::string canonicalize(std::string_view source) { return emit_answer(parse_answer(source)); }

std::vector<Violation> validate_triplets(const AnswerAst& ast) {
  std::vector<Violation> out;
  std::size_t ordinal = 0;
  for (const Triplet* t : ast.triplets()) {
    std::set<std::vector<std::string>> seen;
    for (std::size_t b = 0; b < t->bindings.size(); ++b) {
      const auto& binding = t->bindings[b];
      for (std::size_t i = 0; i < binding.refs.size(); ++i) {
        if (binding.refs[i].index != i) {
          out.push_back({ViolationKind::BadRefIndex,
                         "binding " + std::to_string(b) + ": reference " + std::to_string(i) + " has index [" +
                             std::to_string(binding.refs[i].index) + "]",
                         ordinal});
          break;
        }
      }
      for (const auto& u : binding.units) {
        bool ok = !u.empty() && std::all_of(u.begin(), u.end(), [](char c) {
          return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9');
        });
        if (!ok) out.push_back({ViolationKind::BadUnitName, "unit name '" + u + "'", ordinal});
      }
      if (!seen.insert(binding.unit_set()).second) {
        out.push_back({ViolationKind::DuplicateUnitBinding, "binding " + std::to_string(b) + " repeats a unit set",
                       ordinal});
      }
    }
    ++ordinal;
  }
  return out;
}

std::string phrase_key(std::string_view text) {
  std::string stripped;
  for (char c : text) {
    if (!std::ispunct(static_cast<unsigned char>(c))) stripped.push_back(c);
  }
  std::string collapsed = collapse_lower(stripped);
  std::string out;
  std::size_t start = 0;
  while (start <= collapsed.size() && !collapsed.empty()) {
    auto end = collapsed.find(' ', start);
    if (end == std::string::npos) end = collapsed.size();
    std::string_view word(collapsed.data() + start, end - start);
    if (word.size() > 3 && word.back() == 's' && word[word.size() - 2] != 's') word.remove_suffix(1);
    if (!out.empty()) out.push_back(' ');
    out += word;
    start = end + 1;
  }
  return out;
}

}  // namespace trpkit
