#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qosmc/error.hpp"

namespace qosmc::detail {

enum class TokenKind { identifier, number, punct, end };

struct Token {
  TokenKind kind = TokenKind::end;
  std::string text;
  SourcePosition pos;
  // True when no whitespace or comment separates this token from the previous one.
  bool glued = false;
};

// Shared tokenizer for the RCF, choreography, QL and machine-file syntaxes.
// Comments run from '#' or "//" to the end of the line.
std::vector<Token> tokenize(std::string_view text);

// Cursor over a token vector with the helpers every recursive-descent parser
// in the library needs.
class TokenStream {
 public:
  explicit TokenStream(std::string_view text) : tokens_(tokenize(text)) {}

  const Token& peek(std::size_t ahead = 0) const {
    std::size_t i = index_ + ahead;
    return i < tokens_.size() ? tokens_[i] : tokens_.back();
  }
  const Token& next() {
    const Token& t = peek();
    if (index_ + 1 < tokens_.size()) ++index_;
    return t;
  }

  bool at_end() const { return peek().kind == TokenKind::end; }
  bool is_punct(std::string_view p, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::punct && t.text == p;
  }
  bool is_word(std::string_view w, std::size_t ahead = 0) const {
    const Token& t = peek(ahead);
    return t.kind == TokenKind::identifier && t.text == w;
  }
  bool accept(std::string_view p) {
    if (!is_punct(p)) return false;
    next();
    return true;
  }
  void expect(std::string_view p) {
    if (!accept(p)) fail("expected '" + std::string(p) + "'");
  }
  std::string expect_identifier(const char* what = "identifier") {
    if (peek().kind != TokenKind::identifier) fail(std::string("expected ") + what);
    return next().text;
  }
  void expect_end() {
    if (!at_end()) fail("unexpected trailing input");
  }

  [[noreturn]] void fail(const std::string& message) const {
    const Token& t = peek();
    std::string found = t.kind == TokenKind::end ? "end of input" : "'" + t.text + "'";
    throw ParseError(message + ", found " + found, t.pos);
  }
  [[noreturn]] void fail_at(const std::string& message, SourcePosition pos) const {
    throw ParseError(message, pos);
  }

  std::size_t mark() const { return index_; }
  void reset(std::size_t mark) { index_ = mark; }

 private:
  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

}  // namespace qosmc::detail
