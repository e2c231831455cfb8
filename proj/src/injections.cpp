#include "ciflow/injections.hpp"

#include <cmath>

#include "ciflow/errors.hpp"

namespace ciflow {

NetInjection net_power(std::span<const Generator> gens, std::span<const Load> loads) {
    NetInjection s;
    for (const Generator& g : gens) {
        s.p_s += g.p_g;
        s.q_s += g.q_g;
    }
    for (const Load& l : loads) {
        s.p_s -= l.p_l;
        s.q_s -= l.q_l;
    }
    return s;
}

RectCurrent injection_current(NetInjection s, RectVoltage v) {
    const double d = v.norm2();
    if (d <= kDegenerateVoltageNorm2) {
        throw DegenerateVoltageError("voltage magnitude collapsed during iteration");
    }
    return {(s.p_s * v.vx + s.q_s * v.vy) / d, (s.p_s * v.vy - s.q_s * v.vx) / d};
}

InjectionJacobian injection_jacobian(NetInjection s, RectVoltage v) {
    const double d = v.norm2();
    if (d <= kDegenerateVoltageNorm2) {
        throw DegenerateVoltageError("voltage magnitude collapsed during iteration");
    }
    const double d2 = d * d;
    // Quotient rule on I = conj(S/V); the matrix is [[p, q], [-q, p]] V / |V|^2.
    const double dix_dvx = (s.p_s * (v.vy * v.vy - v.vx * v.vx) - 2.0 * s.q_s * v.vx * v.vy) / d2;
    const double dix_dvy = (s.q_s * (v.vx * v.vx - v.vy * v.vy) - 2.0 * s.p_s * v.vx * v.vy) / d2;
    return {dix_dvx, dix_dvy, dix_dvy, -dix_dvx};
}

double pv_vx(double v_t, double vy) {
    if (!(std::abs(vy) < v_t)) {
        throw PvAngleOverflowError("|Vy| >= Vt at a PV bus (angle beyond the magnitude constraint)");
    }
    return std::sqrt(v_t * v_t - vy * vy);
}

RectCurrent pv_injection_current(NetInjection s, double v_t, double vy) {
    const double vx = pv_vx(v_t, vy);
    const double d = v_t * v_t;
    return {(s.p_s * vx + s.q_s * vy) / d, (s.p_s * vy - s.q_s * vx) / d};
}

PvTerms pv_update_terms(NetInjection s, double v_t, double vy) {
    const double vx = pv_vx(v_t, vy);
    const double d = v_t * v_t;
    // d vx / d vy = -vy / vx on the constraint circle.
    const double slope = -vy / vx;
    PvTerms t;
    t.a = vy / d;
    t.b = (s.p_s * slope + s.q_s) / d;
    t.c = -vx / d;
    t.d = (s.p_s - s.q_s * slope) / d;
    return t;
}

RectCurrent shunt_current(double b_sh, RectVoltage v) {
    return {-b_sh * v.vy, b_sh * v.vx};
}

}  // namespace ciflow
