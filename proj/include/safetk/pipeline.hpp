#pragma once

#include <string>
#include <vector>

#include "safetk/cca/cca.hpp"
#include "safetk/fault/extension.hpp"

namespace safetk {

/// Parses and extends a nominal model. Empty texts stand for absent inputs.
struct ExtensionInputs {
  std::string model;
  std::string flib;
  std::string fei;
  std::string cca;
};

struct Extension {
  fault::ExtendedModel xm;
  std::vector<cca::CommonCauseSpec> common_causes;
};

Extension build_extension(const ExtensionInputs& in);

}  // namespace safetk
