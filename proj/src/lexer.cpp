#include "safetk/lexer.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>

namespace safetk {

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#' || c == '$';
}

constexpr std::string_view kMultiPunct[] = {"<->", "->", "!=", "<=", ">=", ":=", ".."};
constexpr std::string_view kSinglePunct = "(){}[];:,=<>!&|+-*?";

}  // namespace

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0;
  int line = 1;
  int col = 1;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '-' && i + 1 < text.size() && text[i + 1] == '-') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.pos = {line, col};
    std::size_t start = i;
    if (ident_start(c)) {
      std::size_t j = i + 1;
      // `.` is allowed inside identifiers (`sensor1.out`) but never as the
      // last character and never doubled.
      while (j < text.size()) {
        if (ident_char(text[j])) {
          ++j;
        } else if (text[j] == '.' && j + 1 < text.size() && ident_char(text[j + 1])) {
          ++j;
        } else {
          break;
        }
      }
      tok.kind = Token::Kind::identifier;
      tok.text = std::string(text.substr(start, j - start));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      bool real = false;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      if (j + 1 < text.size() && text[j] == '.' && std::isdigit(static_cast<unsigned char>(text[j + 1]))) {
        real = true;
        ++j;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      }
      if (j < text.size() && (text[j] == 'e' || text[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < text.size() && (text[k] == '+' || text[k] == '-')) ++k;
        if (k < text.size() && std::isdigit(static_cast<unsigned char>(text[k]))) {
          real = true;
          j = k;
          while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
        }
      }
      tok.kind = real ? Token::Kind::real : Token::Kind::integer;
      tok.text = std::string(text.substr(start, j - start));
      advance(j - i);
    } else {
      bool matched = false;
      for (std::string_view p : kMultiPunct) {
        if (text.substr(i, p.size()) == p) {
          tok.kind = Token::Kind::punct;
          tok.text = std::string(p);
          advance(p.size());
          matched = true;
          break;
        }
      }
      if (!matched) {
        if (kSinglePunct.find(c) == std::string_view::npos) {
          throw InputError(tok.pos, std::string("unexpected character '") + c + "'");
        }
        tok.kind = Token::Kind::punct;
        tok.text = std::string(1, c);
        advance(1);
      }
    }
    out.push_back(std::move(tok));
  }
  Token end;
  end.kind = Token::Kind::end;
  end.pos = {line, col};
  out.push_back(end);
  return out;
}

TokenCursor::TokenCursor(std::string_view text) : tokens_(tokenize(text)) {}

const Token& TokenCursor::peek(std::size_t ahead) const {
  std::size_t k = index_ + ahead;
  if (k >= tokens_.size()) return tokens_.back();
  return tokens_[k];
}

const Token& TokenCursor::next() {
  const Token& t = peek();
  if (index_ + 1 < tokens_.size()) ++index_;
  return t;
}

bool TokenCursor::is_punct(std::string_view p, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == Token::Kind::punct && t.text == p;
}

bool TokenCursor::is_word(std::string_view w, std::size_t ahead) const {
  const Token& t = peek(ahead);
  return t.kind == Token::Kind::identifier && t.text == w;
}

bool TokenCursor::accept_punct(std::string_view p) {
  if (!is_punct(p)) return false;
  next();
  return true;
}

bool TokenCursor::accept_word(std::string_view w) {
  if (!is_word(w)) return false;
  next();
  return true;
}

void TokenCursor::expect_punct(std::string_view p) {
  if (!accept_punct(p)) fail_expected("'" + std::string(p) + "'");
}

void TokenCursor::expect_word(std::string_view w) {
  if (!accept_word(w)) fail_expected("'" + std::string(w) + "'");
}

std::string TokenCursor::expect_identifier(std::string_view what) {
  if (peek().kind != Token::Kind::identifier) fail_expected(what);
  return next().text;
}

std::int64_t TokenCursor::expect_integer() {
  bool negative = accept_punct("-");
  if (peek().kind != Token::Kind::integer) fail_expected("integer");
  const Token& t = next();
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (ec != std::errc() || ptr != t.text.data() + t.text.size()) {
    throw InputError(t.pos, "integer literal out of range: " + t.text);
  }
  return negative ? -v : v;
}

double TokenCursor::expect_number() {
  bool negative = accept_punct("-");
  const Token& t = peek();
  if (t.kind != Token::Kind::integer && t.kind != Token::Kind::real) fail_expected("number");
  next();
  double v = std::strtod(t.text.c_str(), nullptr);
  return negative ? -v : v;
}

void TokenCursor::fail(const std::string& message) const { throw InputError(peek().pos, message); }

void TokenCursor::fail_expected(std::string_view expected) const {
  const Token& t = peek();
  std::string found = t.kind == Token::Kind::end ? std::string("end of input") : "'" + t.text + "'";
  fail("syntax error: expected " + std::string(expected) + ", found " + found);
}

}  // namespace safetk
