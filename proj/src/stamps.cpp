#include "ciflow/stamps.hpp"

#include "ciflow/errors.hpp"

namespace ciflow {

namespace {

Complex series_admittance(double r, double x) {
    if (r * r + x * x <= 0.0) {
        throw StructuralError("zero series impedance");
    }
    return 1.0 / Complex(r, x);
}

}  // namespace

TerminalStamp line_stamp(double r, double x, double b_charging) {
    const Complex y = series_admittance(r, x);
    const Complex shunt(0.0, b_charging / 2.0);
    return {y + shunt, -y, -y, y + shunt};
}

TerminalStamp transformer_stamp(double r, double x, double tap) {
    if (tap <= 0.0) {
        throw StructuralError("non-positive transformer tap");
    }
    const Complex y = series_admittance(r, x);
    return {y / (tap * tap), -y / tap, -y / tap, y};
}

}  // namespace ciflow
