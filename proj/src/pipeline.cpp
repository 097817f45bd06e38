#include "safetk/pipeline.hpp"

namespace safetk {

Extension build_extension(const ExtensionInputs& in) {
  sts::TypedModel nominal(sts::parse_model(in.model));
  fault::FaultLibrary lib = fault::load_fault_library(in.flib);
  Extension out;
  out.xm = fault::extend_model(nominal, lib, fault::parse_fei(in.fei));
  out.common_causes = cca::parse_cca(in.cca);
  if (!out.common_causes.empty()) out.xm = cca::apply_cca(out.xm, out.common_causes);
  return out;
}

}  // namespace safetk
