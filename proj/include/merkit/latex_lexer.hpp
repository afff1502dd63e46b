#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace merkit::latex {

enum class TokenKind {
  Command,     // \name or control symbol; text has no backslash
  Char,        // one literal character (a full UTF-8 sequence)
  GroupOpen,   // {
  GroupClose,  // }
  Superscript,
  Subscript,
  Alignment,  // &
  LineBreak,  // \\ (backslash backslash)
  EnvBegin,   // \begin{name}; text is the environment name
  EnvEnd,     // \end{name}
  Whitespace,
};

std::string_view kind_name(TokenKind kind);

struct Token {
  TokenKind kind = TokenKind::Char;
  std::string text;

  static Token command(std::string name) { return {TokenKind::Command, std::move(name)}; }
  static Token character(std::string c) { return {TokenKind::Char, std::move(c)}; }
  static Token group_open() { return {TokenKind::GroupOpen, "{"}; }
  static Token group_close() { return {TokenKind::GroupClose, "}"}; }
  static Token superscript() { return {TokenKind::Superscript, "^"}; }
  static Token subscript() { return {TokenKind::Subscript, "_"}; }
  static Token alignment() { return {TokenKind::Alignment, "&"}; }
  static Token line_break() { return {TokenKind::LineBreak, "\\\\"}; }
  static Token env_begin(std::string name) { return {TokenKind::EnvBegin, std::move(name)}; }
  static Token env_end(std::string name) { return {TokenKind::EnvEnd, std::move(name)}; }
  static Token whitespace() { return {TokenKind::Whitespace, " "}; }

  // Command made of ASCII letters, e.g. \frac (as opposed to a control symbol like \{).
  bool is_control_word() const;

  bool operator==(const Token&) const = default;
};

struct TokenSeq {
  std::vector<Token> tokens;
  std::uint64_t source_hash = 0;

  // Token equality; the source hash is provenance and does not take part.
  bool token_equals(const TokenSeq& other) const { return tokens == other.tokens; }
};

class LexError : public std::runtime_error {
 public:
  enum class Kind { UnbalancedGroup, UnterminatedCommand, MismatchedEnvironment };

  LexError(Kind kind, std::size_t offset, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  // Byte offset into the source string.
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

std::string_view lex_error_name(LexError::Kind kind);

// Lexes math-mode LaTeX. `%` comments are stripped, whitespace runs collapse to
// one Whitespace token, and spaces after a control word are absorbed (TeX rules).
// Throws LexError on unbalanced groups/environments or a trailing backslash.
TokenSeq tokenize(std::string_view src);

// Non-throwing variant.
std::optional<TokenSeq> try_tokenize(std::string_view src);

struct NormalizeOptions {
  // Rewrite \left( ... \right) to plain delimiters when nothing tall is enclosed.
  bool plain_left_right = false;
};

// Canonicalizes a token stream:
//   drop whitespace; apply the alias table (\dfrac, \tfrac -> \frac; \le -> \leq;
//   \ge -> \geq; \( \) \[ \] removed); optionally flatten \left/\right; brace bare
//   single-token script arguments; unwrap single-token groups that are not
//   script or command arguments.
// The result is a fixed point of normalize.
TokenSeq normalize(const TokenSeq& seq, const NormalizeOptions& options = {});

// Inverse of tokenize for any stream tokenize (or normalize) can produce.
std::string detokenize(const TokenSeq& seq);

// detokenize(normalize(tokenize(src))), or nullopt when src does not lex.
std::optional<std::string> canonical_form(std::string_view src, const NormalizeOptions& options = {});

}  // namespace merkit::latex
