#pragma once

#include <string>
#include <string_view>

namespace safetk {

/// Shortest decimal rendering that reads back to the same double.
std::string format_real(double v);

/// Reads a whole file; throws InputError naming the path on failure.
std::string read_file(const std::string& path);

/// Escapes `& < > " '` for XML attribute and text content.
std::string xml_escape(std::string_view s);

}  // namespace safetk
