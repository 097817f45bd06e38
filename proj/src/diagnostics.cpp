#include "safetk/diagnostics.hpp"

namespace safetk {

namespace {

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::error:
      return "error";
    case Severity::warning:
      return "warning";
    case Severity::note:
      return "note";
  }
  return "error";
}

std::string summarize(const std::vector<Diagnostic>& diags) {
  if (diags.empty()) return "invalid input";
  const Diagnostic& d = diags.front();
  std::string out = std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " +
                    d.message;
  if (diags.size() > 1) out += " (+" + std::to_string(diags.size() - 1) + " more)";
  return out;
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d, const std::string& file) {
  return file + ":" + std::to_string(d.pos.line) + ":" + std::to_string(d.pos.column) + ": " +
         severity_name(d.severity) + ": " + d.message;
}

InputError::InputError(std::vector<Diagnostic> diags)
    : std::runtime_error(summarize(diags)), diags_(std::move(diags)) {}

InputError::InputError(SourcePos pos, const std::string& message)
    : InputError(std::vector<Diagnostic>{Diagnostic{pos, Severity::error, message}}) {}

InputError::InputError(const std::string& message)
    : InputError(std::vector<Diagnostic>{Diagnostic{{0, 0}, Severity::error, message}}) {}

}  // namespace safetk
