#pragma once

#include <string>

#include "safetk/format.hpp"
#include "safetk/pipeline.hpp"

inline std::string fixture(const std::string& name) { return std::string(SAFETK_FIXTURES) + "/" + name; }

inline safetk::Extension load_fixture(const std::string& stem, const std::string& cca = "",
                                      const std::string& flib = "") {
  safetk::ExtensionInputs in;
  in.model = safetk::read_file(fixture(stem + ".smx"));
  in.fei = safetk::read_file(fixture(stem + ".fei"));
  if (!cca.empty()) in.cca = safetk::read_file(fixture(cca));
  if (!flib.empty()) in.flib = safetk::read_file(fixture(flib));
  return safetk::build_extension(in);
}
