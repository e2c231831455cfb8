#pragma once

#include <stdexcept>
#include <string>

namespace ciflow {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input text. `line` is 1-based, -1 when unknown.
struct ParseError : Error {
    explicit ParseError(const std::string& msg, int line_no = -1)
        : Error(line_no > 0 ? "line " + std::to_string(line_no) + ": " + msg : msg),
          line(line_no) {}
    int line;
};

/// Well-formed input describing an inconsistent network (bad bus reference etc.).
struct StructuralError : Error {
    using Error::Error;
};

struct SingularMatrixError : Error {
    SingularMatrixError(const std::string& msg, int pivot)
        : Error(msg + " (pivot index " + std::to_string(pivot) + ")"), pivot_index(pivot) {}
    int pivot_index;
};

/// |V|^2 fell below the degeneracy threshold; the iterate is collapsing.
struct DegenerateVoltageError : Error {
    using Error::Error;
};

/// |Vy| >= Vt at a PV bus: no real Vx satisfies the magnitude constraint.
struct PvAngleOverflowError : Error {
    using Error::Error;
};

}  // namespace ciflow
