#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "opsem/rules.hpp"

namespace opsem {

// Catalog metadata for a built-in signature: closing-pool defaults and
// whether the weighted small-step oracle applies to it.
struct InstanceInfo {
  std::string name;
  std::string summary;
  int default_pool_size = 3;
  bool values_only = false;
  bool has_step_oracle = false;
};

// Built-in dynamic signatures: "cbn", "cbv", "nondet", "cbn-howe".
// "cbn-howe" is returned in value-passive form; rigidify it to evaluate.
// Throws StructuralError on an unknown name.
DynamicSignature load_instance(std::string_view name);

std::vector<InstanceInfo> catalog();

}  // namespace opsem
