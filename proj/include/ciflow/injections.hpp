#pragma once

#include <span>

#include "ciflow/network.hpp"

namespace ciflow {

/// Net scheduled power at a bus: sum of generation minus sum of load.
struct NetInjection {
    double p_s = 0.0;
    double q_s = 0.0;
};

struct RectVoltage {
    double vx = 0.0;
    double vy = 0.0;
    double norm2() const { return vx * vx + vy * vy; }
};

struct RectCurrent {
    double ix = 0.0;
    double iy = 0.0;
};

/// Partial derivatives of the PV-bus injection current with respect to
/// (q_s, vy) at fixed p_s and v_t:  [dix/dq, dix/dvy; diy/dq, diy/dvy].
struct PvTerms {
    double a = 0.0;  // dix / dq_s
    double b = 0.0;  // dix / dvy
    double c = 0.0;  // diy / dq_s
    double d = 0.0;  // diy / dvy
};

/// d(ix, iy) / d(vx, vy) of injection_current.
struct InjectionJacobian {
    double dix_dvx = 0.0;
    double dix_dvy = 0.0;
    double diy_dvx = 0.0;
    double diy_dvy = 0.0;
};

constexpr double kDegenerateVoltageNorm2 = 1e-8;

NetInjection net_power(std::span<const Generator> gens, std::span<const Load> loads);

/// Injection current I = conj(S / V):
///   ix = (p_s vx + q_s vy) / |V|^2,  iy = (p_s vy - q_s vx) / |V|^2.
/// Throws DegenerateVoltageError when |V|^2 <= 1e-8.
RectCurrent injection_current(NetInjection s, RectVoltage v);

/// Exact analytic derivative of injection_current (unit-verified against
/// central finite differences).
InjectionJacobian injection_jacobian(NetInjection s, RectVoltage v);

/// Positive root vx = sqrt(v_t^2 - vy^2) of the PV magnitude constraint.
/// Throws PvAngleOverflowError when |vy| >= v_t.
double pv_vx(double v_t, double vy);

/// injection_current evaluated on the magnitude constraint; |V|^2 == v_t^2.
RectCurrent pv_injection_current(NetInjection s, double v_t, double vy);

/// Exact analytic derivative of pv_injection_current w.r.t. (q_s, vy).
PvTerms pv_update_terms(NetInjection s, double v_t, double vy);

/// Shunt current I = j b_sh V. Shunts live inside the admittance matrix;
/// this stands alone so assembly can be cross-checked.
RectCurrent shunt_current(double b_sh, RectVoltage v);

}  // namespace ciflow
