#pragma once

#include <string>
#include <variant>

#include "confgate/alignment.hpp"
#include "confgate/conformal.hpp"

namespace confgate {

inline constexpr int kGateSchemaVersion = 1;

using AnyGate = std::variant<CalibratedGate, AlignmentGate>;

// Gate files are versioned JSON. Doubles are serialized in shortest
// round-trip form, so load(save(g)) == g bit for bit.
void save_gate(const CalibratedGate& gate, const std::string& path);
void save_gate(const AlignmentGate& gate, const std::string& path);

// Dispatches on the stored method; throws VersionMismatch for unknown
// schema versions.
AnyGate load_gate(const std::string& path);

}  // namespace confgate
