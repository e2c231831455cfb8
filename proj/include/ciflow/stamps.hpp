#pragma once

#include <complex>

namespace ciflow {

using Complex = std::complex<double>;

/// 2x2 terminal admittance block of a two-port component:
///   [I1; I2] = [[y11, y12], [y21, y22]] [V1; V2]
struct TerminalStamp {
    Complex y11, y12, y21, y22;
};

/// Pi-model transmission line: diagonal 1/(r+jx) + j*b/2, off-diagonal -1/(r+jx).
/// Requires r^2 + x^2 > 0.
TerminalStamp line_stamp(double r, double x, double b_charging);

/// Two-winding transformer with off-nominal ratio `tap` on side 1:
///   [[y/tap^2, -y/tap], [-y/tap, y]] with y = 1/(r+jx).
/// Requires r^2 + x^2 > 0 and tap > 0.
TerminalStamp transformer_stamp(double r, double x, double tap);

}  // namespace ciflow
