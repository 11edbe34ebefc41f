#pragma once
// Ready-made experiment specs: one per lattice/ensemble CLT plus a quartic
// Toda configuration exercising the full task set.

#include <string>
#include <vector>

#include "gge/io.hpp"

namespace gge {

struct PresetInfo {
  std::string name;
  std::string description;
};

// Names with one-line descriptions, in a fixed presentation order.
std::vector<PresetInfo> preset_list();

// Full spec for a preset name. DomainError for unknown names.
ExperimentSpec preset_spec(const std::string& name);

}  // namespace gge
