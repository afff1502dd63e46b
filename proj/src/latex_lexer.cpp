#include "merkit/latex_lexer.hpp"

#include "merkit/hashing.hpp"
#include "merkit/utf8.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <unordered_set>

namespace merkit::latex {

namespace {

bool is_ascii_letter(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

struct Opener {
  bool is_env = false;
  std::string name;
  std::size_t offset = 0;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (is_space(c)) {
        skip_space_run();
        push_whitespace();
      } else if (c == '%') {
        skip_comment();
      } else if (c == '\\') {
        lex_backslash();
      } else if (c == '{') {
        stack_.push_back({false, {}, pos_});
        tokens_.push_back(Token::group_open());
        ++pos_;
      } else if (c == '}') {
        if (stack_.empty() || stack_.back().is_env) {
          throw LexError(LexError::Kind::UnbalancedGroup, pos_, "unexpected '}'");
        }
        stack_.pop_back();
        tokens_.push_back(Token::group_close());
        ++pos_;
      } else if (c == '^') {
        tokens_.push_back(Token::superscript());
        ++pos_;
      } else if (c == '_') {
        tokens_.push_back(Token::subscript());
        ++pos_;
      } else if (c == '&') {
        tokens_.push_back(Token::alignment());
        ++pos_;
      } else {
        const std::size_t len = utf8::sequence_length(src_, pos_);
        tokens_.push_back(Token::character(std::string(src_.substr(pos_, len))));
        pos_ += len;
      }
    }
    if (!stack_.empty()) {
      const Opener& open = stack_.back();
      if (open.is_env) {
        throw LexError(LexError::Kind::MismatchedEnvironment, open.offset,
                       "environment '" + open.name + "' is never closed");
      }
      throw LexError(LexError::Kind::UnbalancedGroup, open.offset, "'{' is never closed");
    }
    return std::move(tokens_);
  }

 private:
  void skip_space_run() {
    while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
  }

  // A comment runs through the end of its line, newline included.
  void skip_comment() {
    const std::size_t nl = src_.find('\n', pos_);
    pos_ = nl == std::string_view::npos ? src_.size() : nl + 1;
  }

  void push_whitespace() {
    if (tokens_.empty() || tokens_.back().kind != TokenKind::Whitespace) {
      tokens_.push_back(Token::whitespace());
    }
  }

  // Spaces, newlines and comments after a control word are not tokens.
  void skip_after_control_word() {
    while (pos_ < src_.size()) {
      if (is_space(src_[pos_])) {
        ++pos_;
      } else if (src_[pos_] == '%') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void lex_backslash() {
    const std::size_t start = pos_;
    if (pos_ + 1 >= src_.size()) {
      throw LexError(LexError::Kind::UnterminatedCommand, start, "trailing backslash");
    }
    const char next = src_[pos_ + 1];
    if (next == '\\') {
      tokens_.push_back(Token::line_break());
      pos_ += 2;
      return;
    }
    if (!is_ascii_letter(next)) {
      const std::size_t len = utf8::sequence_length(src_, pos_ + 1);
      tokens_.push_back(Token::command(std::string(src_.substr(pos_ + 1, len))));
      pos_ += 1 + len;
      return;
    }
    std::size_t end = pos_ + 1;
    while (end < src_.size() && is_ascii_letter(src_[end])) ++end;
    std::string name(src_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end;
    skip_after_control_word();
    if (name == "begin" || name == "end") {
      lex_environment(name == "begin", start);
      return;
    }
    tokens_.push_back(Token::command(std::move(name)));
  }

  void lex_environment(bool begin, std::size_t start) {
    if (pos_ >= src_.size() || src_[pos_] != '{') {
      throw LexError(LexError::Kind::UnterminatedCommand, start, "expected '{' after environment command");
    }
    std::size_t end = pos_ + 1;
    while (end < src_.size() && src_[end] != '}') {
      const char c = src_[end];
      if (c == '{' || c == '\\' || c == '%' || is_space(c)) {
        throw LexError(LexError::Kind::UnterminatedCommand, start, "malformed environment name");
      }
      ++end;
    }
    if (end >= src_.size() || end == pos_ + 1) {
      throw LexError(LexError::Kind::UnterminatedCommand, start, "unterminated environment name");
    }
    std::string name(src_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    if (begin) {
      stack_.push_back({true, name, start});
      tokens_.push_back(Token::env_begin(std::move(name)));
      return;
    }
    if (stack_.empty() || !stack_.back().is_env || stack_.back().name != name) {
      throw LexError(LexError::Kind::MismatchedEnvironment, start, "\\end{" + name + "} does not match");
    }
    stack_.pop_back();
    tokens_.push_back(Token::env_end(std::move(name)));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::vector<Token> tokens_;
  std::vector<Opener> stack_;
};

// Filters applied token by token: whitespace removal and the alias table.
std::vector<Token> apply_filters(const std::vector<Token>& in) {
  static const std::unordered_map<std::string, std::string> kAliases = {
      {"dfrac", "frac"}, {"tfrac", "frac"}, {"le", "leq"}, {"ge", "geq"}};
  static const std::unordered_set<std::string> kMathDelimiters = {"(", ")", "[", "]"};

  std::vector<Token> out;
  out.reserve(in.size());
  for (const Token& tok : in) {
    if (tok.kind == TokenKind::Whitespace) continue;
    if (tok.kind == TokenKind::Command) {
      if (kMathDelimiters.contains(tok.text)) continue;
      if (auto it = kAliases.find(tok.text); it != kAliases.end()) {
        out.push_back(Token::command(it->second));
        continue;
      }
    }
    out.push_back(tok);
  }
  return out;
}

bool is_tall(const Token& tok) {
  static const std::unordered_set<std::string> kTall = {
      "frac",     "dfrac",     "tfrac",     "cfrac",    "binom",     "dbinom",   "tbinom",  "sum",
      "prod",     "coprod",    "int",       "iint",     "iiint",     "oint",     "bigcup",  "bigcap",
      "bigoplus", "bigotimes", "bigvee",    "bigwedge", "sqrt",      "over",     "atop",    "choose",
      "stackrel", "overset",   "underset",  "overbrace", "underbrace", "substack", "matrix", "pmatrix",
      "bmatrix",  "vmatrix",   "cases",     "genfrac"};
  if (tok.kind == TokenKind::EnvBegin) return true;
  return tok.kind == TokenKind::Command && kTall.contains(tok.text);
}

bool is_delimiter_token(const Token& tok) {
  return tok.kind == TokenKind::Char || tok.kind == TokenKind::Command;
}

// \left D ... \right D with no tall construct inside becomes D ... D.
std::vector<Token> flatten_left_right(const std::vector<Token>& in) {
  struct Pending {
    std::size_t index;
    bool valid;
  };
  std::vector<bool> drop(in.size(), false);
  std::vector<Pending> stack;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Token& tok = in[i];
    if (tok.kind != TokenKind::Command) continue;
    if (tok.text == "left") {
      stack.push_back({i, i + 1 < in.size() && is_delimiter_token(in[i + 1])});
    } else if (tok.text == "right" && !stack.empty()) {
      const Pending open = stack.back();
      stack.pop_back();
      if (!open.valid || i + 1 >= in.size() || !is_delimiter_token(in[i + 1])) continue;
      const bool tall = std::any_of(in.begin() + static_cast<std::ptrdiff_t>(open.index + 2),
                                    in.begin() + static_cast<std::ptrdiff_t>(i), is_tall);
      if (tall) continue;
      drop[open.index] = true;
      drop[i] = true;
      // the null delimiter "." has no plain counterpart
      if (in[open.index + 1] == Token::character(".")) drop[open.index + 1] = true;
      if (in[i + 1] == Token::character(".")) drop[i + 1] = true;
    }
  }
  std::vector<Token> out;
  out.reserve(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (!drop[i]) out.push_back(in[i]);
  }
  return out;
}

bool is_script(const Token& tok) {
  return tok.kind == TokenKind::Superscript || tok.kind == TokenKind::Subscript;
}

// A group directly after one of these is an argument and keeps its braces.
bool opens_argument(const Token& tok) {
  return tok.kind == TokenKind::Command || tok.kind == TokenKind::EnvBegin || is_script(tok) ||
         tok.kind == TokenKind::GroupClose;
}

bool is_atom(const Token& tok) { return tok.kind == TokenKind::Char || tok.kind == TokenKind::Command; }

// Normalizes tokens up to the GroupClose matching the current depth; `i` is left on
// that GroupClose (or at the end).
std::vector<Token> normalize_body(const std::vector<Token>& in, std::size_t& i) {
  std::vector<Token> out;
  while (i < in.size() && in[i].kind != TokenKind::GroupClose) {
    const Token& tok = in[i];
    if (tok.kind == TokenKind::GroupOpen) {
      ++i;
      std::vector<Token> inner = normalize_body(in, i);
      if (i < in.size()) ++i;
      const bool argument = !out.empty() && opens_argument(out.back());
      if (!argument && inner.size() == 1 && is_atom(inner.front())) {
        out.push_back(std::move(inner.front()));
      } else {
        out.push_back(Token::group_open());
        out.insert(out.end(), std::make_move_iterator(inner.begin()), std::make_move_iterator(inner.end()));
        out.push_back(Token::group_close());
      }
      continue;
    }
    if (is_atom(tok) && !out.empty() && is_script(out.back())) {
      out.push_back(Token::group_open());
      out.push_back(tok);
      out.push_back(Token::group_close());
    } else {
      out.push_back(tok);
    }
    ++i;
  }
  return out;
}

}  // namespace

std::string_view kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::Command: return "Command";
    case TokenKind::Char: return "Char";
    case TokenKind::GroupOpen: return "GroupOpen";
    case TokenKind::GroupClose: return "GroupClose";
    case TokenKind::Superscript: return "Superscript";
    case TokenKind::Subscript: return "Subscript";
    case TokenKind::Alignment: return "Alignment";
    case TokenKind::LineBreak: return "LineBreak";
    case TokenKind::EnvBegin: return "EnvBegin";
    case TokenKind::EnvEnd: return "EnvEnd";
    case TokenKind::Whitespace: return "Whitespace";
  }
  return "?";
}

bool Token::is_control_word() const {
  return kind == TokenKind::Command && !text.empty() && std::all_of(text.begin(), text.end(), is_ascii_letter);
}

LexError::LexError(Kind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(lex_error_name(kind)) + " at byte " + std::to_string(offset) + ": " + detail),
      kind_(kind),
      offset_(offset) {}

std::string_view lex_error_name(LexError::Kind kind) {
  switch (kind) {
    case LexError::Kind::UnbalancedGroup: return "UnbalancedGroup";
    case LexError::Kind::UnterminatedCommand: return "UnterminatedCommand";
    case LexError::Kind::MismatchedEnvironment: return "MismatchedEnvironment";
  }
  return "LexError";
}

TokenSeq tokenize(std::string_view src) {
  TokenSeq seq;
  seq.tokens = Lexer(src).run();
  seq.source_hash = stable_hash64(src);
  return seq;
}

std::optional<TokenSeq> try_tokenize(std::string_view src) {
  try {
    return tokenize(src);
  } catch (const LexError&) {
    return std::nullopt;
  }
}

TokenSeq normalize(const TokenSeq& seq, const NormalizeOptions& options) {
  std::vector<Token> filtered = apply_filters(seq.tokens);
  if (options.plain_left_right) filtered = flatten_left_right(filtered);

  TokenSeq out;
  out.source_hash = seq.source_hash;
  std::size_t i = 0;
  while (i < filtered.size()) {
    auto part = normalize_body(filtered, i);
    out.tokens.insert(out.tokens.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    // stray closer in an unbalanced stream; keep it verbatim
    if (i < filtered.size()) out.tokens.push_back(filtered[i++]);
  }
  return out;
}

std::string detokenize(const TokenSeq& seq) {
  std::string out;
  const auto& toks = seq.tokens;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& tok = toks[i];
    switch (tok.kind) {
      case TokenKind::Command:
        out += '\\';
        out += tok.text;
        if (tok.is_control_word() && i + 1 < toks.size() && toks[i + 1].kind == TokenKind::Char &&
            !toks[i + 1].text.empty() && is_ascii_letter(toks[i + 1].text.front())) {
          out += ' ';
        }
        break;
      case TokenKind::EnvBegin: out += "\\begin{" + tok.text + "}"; break;
      case TokenKind::EnvEnd: out += "\\end{" + tok.text + "}"; break;
      case TokenKind::Whitespace: out += ' '; break;
      default: out += tok.text; break;
    }
  }
  return out;
}

std::optional<std::string> canonical_form(std::string_view src, const NormalizeOptions& options) {
  auto seq = try_tokenize(src);
  if (!seq) return std::nullopt;
  return detokenize(normalize(*seq, options));
}

}  // namespace merkit::latex
