#include "lexer.hpp"

#include <array>
#include <cctype>

namespace qosmc::detail {

namespace {

constexpr std::array<std::string_view, 5> kTwoCharPuncts = {"->", "<=", ">=", "&&", "||"};
constexpr std::string_view kOneCharPuncts = "<>=!(){}[];:,.*+-|?";

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  SourcePosition pos;
  std::size_t i = 0;
  bool glued = false;

  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n && i < text.size(); ++k, ++i) {
      if (text[i] == '\n') {
        ++pos.line;
        pos.column = 1;
      } else {
        ++pos.column;
      }
      pos.offset = i + 1;
    }
  };

  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      glued = false;
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < text.size() && text[i + 1] == '/')) {
      while (i < text.size() && text[i] != '\n') advance(1);
      glued = false;
      continue;
    }

    Token tok;
    tok.pos = pos;
    tok.glued = glued && !out.empty();
    std::size_t start = i;

    if (std::isalpha(static_cast<unsigned char>(c))) {
      while (i < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_')) {
        advance(1);
      }
      tok.kind = TokenKind::identifier;
    } else if (is_digit(c) || (c == '.' && i + 1 < text.size() && is_digit(text[i + 1]))) {
      bool seen_point = false;
      while (i < text.size() && (is_digit(text[i]) || (text[i] == '.' && !seen_point &&
                                                       i + 1 < text.size() &&
                                                       is_digit(text[i + 1])))) {
        if (text[i] == '.') seen_point = true;
        advance(1);
      }
      tok.kind = TokenKind::number;
    } else {
      std::size_t len = 0;
      for (auto p : kTwoCharPuncts) {
        if (text.substr(i, 2) == p) len = 2;
      }
      if (len == 0 && kOneCharPuncts.find(c) != std::string_view::npos) len = 1;
      if (len == 0) {
        throw ParseError(std::string("unexpected character '") + c + "'", pos);
      }
      advance(len);
      tok.kind = TokenKind::punct;
    }
    tok.text = std::string(text.substr(start, i - start));
    out.push_back(std::move(tok));
    glued = true;
  }

  Token end;
  end.kind = TokenKind::end;
  end.pos = pos;
  out.push_back(end);
  return out;
}

}  // namespace qosmc::detail
