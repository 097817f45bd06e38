#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "safetk/diagnostics.hpp"

namespace safetk {

/// Token stream shared by every textual input language of the toolkit
/// (models, fault libraries, extension instructions, common causes, TFPGs,
/// node bindings). `--` starts a comment that runs to the end of the line.
struct Token {
  enum class Kind { identifier, integer, real, punct, end };
  Kind kind = Kind::end;
  std::string text;
  SourcePos pos;
};

std::vector<Token> tokenize(std::string_view text);

class TokenCursor {
 public:
  explicit TokenCursor(std::string_view text);

  const Token& peek(std::size_t ahead = 0) const;
  const Token& next();
  bool at_end() const { return peek().kind == Token::Kind::end; }

  bool is_punct(std::string_view p, std::size_t ahead = 0) const;
  bool is_word(std::string_view w, std::size_t ahead = 0) const;
  bool accept_punct(std::string_view p);
  bool accept_word(std::string_view w);
  void expect_punct(std::string_view p);
  void expect_word(std::string_view w);
  std::string expect_identifier(std::string_view what = "identifier");
  std::int64_t expect_integer();
  /// Accepts an integer or real literal, with an optional leading minus.
  double expect_number();

  [[noreturn]] void fail(const std::string& message) const;
  [[noreturn]] void fail_expected(std::string_view expected) const;

 private:
  std::vector<Token> tokens_;
  std::size_t index_ = 0;
};

}  // namespace safetk
