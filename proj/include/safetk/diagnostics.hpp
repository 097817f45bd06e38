#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace safetk {

struct SourcePos {
  int line = 0;
  int column = 0;
};

enum class Severity { error, warning, note };

struct Diagnostic {
  SourcePos pos;
  Severity severity = Severity::error;
  std::string message;
};

/// Renders `file:line:col: severity: message`.
std::string format_diagnostic(const Diagnostic& d, const std::string& file);

/// Input that cannot be accepted: syntax, typing, or a semantic rule of one
/// of the input languages. Carries every diagnostic collected.
class InputError : public std::runtime_error {
 public:
  explicit InputError(std::vector<Diagnostic> diags);
  InputError(SourcePos pos, const std::string& message);
  explicit InputError(const std::string& message);

  const std::vector<Diagnostic>& diagnostics() const { return diags_; }

 private:
  std::vector<Diagnostic> diags_;
};

/// The explicit-state engine exceeded its configured state cap.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace safetk
