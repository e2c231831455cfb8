#pragma once

#include <string>
#include <vector>

#include "ciflow/network.hpp"

namespace ciflow {

enum class ViolationKind {
    SlackCount,
    BadBusRef,
    BadVoltageTarget,
    BadImpedance,
    BadTap,
    LineWithTap,
    TransformerWithCharging,
    BadQLimits,
    PvWithoutGenerator,
    Disconnected,
    NonFinite,
};

struct Violation {
    ViolationKind kind;
    std::string message;
};

/// Audit a case against the model invariants. Never throws; an empty list
/// means the case is solvable input.
std::vector<Violation> validate_case(const NetworkCase& net);

}  // namespace ciflow
