#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "memsim/lindyn.hpp"
#include "memsim/membrane.hpp"
#include "memsim/sim.hpp"

namespace memsim::shell {

// Load/validation failure; the pointer names the offending JSON location.
struct ScenarioError : std::runtime_error {
  std::string pointer;
  ScenarioError(std::string ptr, const std::string& what)
      : std::runtime_error("scenario error at " + ptr + ": " + what), pointer(std::move(ptr)) {}
};

struct Scenario {
  membrane::MembraneSpec membrane_spec;
  membrane::ElectrodeGeometry electrode;
  membrane::CapacitorSpec capacitor;
  lindyn::CavitySpec cavity;
  std::vector<lindyn::MechModeParams> modes;
  bool modes_derived = false;
  std::vector<lindyn::DriveConfig> drives;
  std::optional<lindyn::PowerMap> power_anchor;
  sim::SimConfig simcfg;
  std::map<std::string, sim::PulseSequence> sequences;

  // System attached to the selected mechanical mode(s), using drive `d`.
  sim::SystemModel system(std::size_t drive, std::vector<std::size_t> mode_indices) const;
};

// Strict parse: unknown keys are rejected, units are validated, every error
// names its JSON pointer.
Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario(const std::string& path);

}  // namespace memsim::shell
