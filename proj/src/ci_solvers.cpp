#include <cmath>
#include <optional>

#include "solver_internal.hpp"

namespace ciflow {

namespace {

using detail::CaseView;

struct UnknownMap {
    std::vector<int> col_of;  // internal bus position -> first column of its pair, or -1
    int dim = 0;
};

/// CiNewton/CiLinear keep one unknown pair per non-slack bus (PV buses swap
/// dVx for dQ). CiPmu keeps pairs for PQ buses only: slack and PV voltages are
/// fully known there and their rows and columns leave the system.
UnknownMap make_map(const CaseView& view, Method method) {
    UnknownMap map;
    map.col_of.assign(static_cast<std::size_t>(view.index.size()), -1);
    for (int p = 0; p < view.index.size(); ++p) {
        const BusKind k = view.kind[static_cast<std::size_t>(p)];
        if (k == BusKind::Slack) continue;
        if (method == Method::CiPmu && k == BusKind::Pv) continue;
        map.col_of[static_cast<std::size_t>(p)] = map.dim;
        map.dim += 2;
    }
    return map;
}

std::vector<RectCurrent> residual(const CaseView& view, const SolverState& state) {
    const int nb = view.index.size();
    std::vector<Complex> v(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        v[static_cast<std::size_t>(p)] = {state.voltages[static_cast<std::size_t>(p)].vx,
                                          state.voltages[static_cast<std::size_t>(p)].vy};
    }
    const std::vector<Complex> yv = view.y.multiply(v);
    std::vector<RectCurrent> res(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        const auto up = static_cast<std::size_t>(p);
        RectCurrent i;
        if (view.kind[up] == BusKind::Pv) {
            const int k = view.pv_ordinal[up];
            i = pv_injection_current({view.sched[up].p_s, state.q_s_pv[static_cast<std::size_t>(k)]},
                                     view.v_target[up], state.voltages[up].vy);
        } else {
            i = injection_current(view.sched[up], state.voltages[up]);
        }
        res[up] = {i.ix - yv[up].real(), i.iy - yv[up].imag()};
    }
    return res;
}

SparseMatrix build_matrix(const CaseView& view, const SolverState& state, Method method,
                          const UnknownMap& map) {
    SparseMatrix m(map.dim);
    for (const YBus::Entry& e : view.y.entries()) {
        const auto i = static_cast<std::size_t>(e.row);
        const auto j = static_cast<std::size_t>(e.col);
        const int ri = map.col_of[i];
        const int cj = map.col_of[j];
        if (ri < 0 || cj < 0) continue;  // fixed-voltage rows/columns stay out
        const double g = e.y.real();
        const double b = e.y.imag();

        if (method == Method::CiPmu || view.kind[j] == BusKind::Pq) {
            m.add(ri, cj, g);
            m.add(ri, cj + 1, -b);
            m.add(ri + 1, cj, b);
            m.add(ri + 1, cj + 1, g);
            if (e.row == e.col && method == Method::CiNewton) {
                // Nonlinear representation: injection derivative joins the diagonal.
                const InjectionJacobian jac =
                    injection_jacobian(view.sched[i], state.voltages[i]);
                m.add(ri, cj, -jac.dix_dvx);
                m.add(ri, cj + 1, -jac.dix_dvy);
                m.add(ri + 1, cj, -jac.diy_dvx);
                m.add(ri + 1, cj + 1, -jac.diy_dvy);
            }
            continue;
        }

        // PV column pair: unknowns are (dQ_s, dVy); dVx rides along the
        // magnitude constraint with slope -Vy/Vx.
        const double slope = -state.voltages[j].vy / state.voltages[j].vx;
        m.add(ri, cj + 1, g * slope - b);
        m.add(ri + 1, cj + 1, b * slope + g);
        if (e.row == e.col) {
            const int k = view.pv_ordinal[j];
            const PvTerms t =
                pv_update_terms({view.sched[j].p_s, state.q_s_pv[static_cast<std::size_t>(k)]},
                                view.v_target[j], state.voltages[j].vy);
            m.add(ri, cj, -t.a);
            m.add(ri + 1, cj, -t.c);
            m.add(ri, cj + 1, -t.b);
            m.add(ri + 1, cj + 1, -t.d);
        }
    }
    m.finalize();
    return m;
}

void apply_update(const CaseView& view, const UnknownMap& map, std::span<const double> dx,
                  SolverState& state) {
    for (int p = 0; p < view.index.size(); ++p) {
        const auto up = static_cast<std::size_t>(p);
        const int c = map.col_of[up];
        if (c < 0) continue;
        if (view.kind[up] == BusKind::Pv) {
            const int k = view.pv_ordinal[up];
            state.q_s_pv[static_cast<std::size_t>(k)] += dx[static_cast<std::size_t>(c)];
            double vy = state.voltages[up].vy + dx[static_cast<std::size_t>(c) + 1];
            // A long early step can leave the |V| = Vt disk where Vx has no
            // real root; project back inside. Inactive near the solution.
            const double vy_cap = 0.99 * view.v_target[up];
            if (std::abs(vy) >= vy_cap) vy = vy < 0 ? -vy_cap : vy_cap;
            state.voltages[up].vy = vy;
            state.voltages[up].vx = pv_vx(view.v_target[up], vy);
        } else {
            state.voltages[up].vx += dx[static_cast<std::size_t>(c)];
            state.voltages[up].vy += dx[static_cast<std::size_t>(c) + 1];
        }
    }
}

SolutionReport run_ci(const NetworkCase& net, const SolverOptions& opts, Method method,
                      const PmuAngleSet* pmu) {
    const auto t0 = detail::Clock::now();
    const CaseView view(net);
    const UnknownMap map = make_map(view, method);

    SolverState st = detail::flat_start(view, opts);
    if (method == Method::CiPmu) {
        for (int p : view.pv_pos) {
            const int id = view.index.id_of(p);
            const auto it = pmu->find(id);
            if (it == pmu->end()) {
                throw StructuralError("missing PMU angle for PV bus " + std::to_string(id));
            }
            if (!std::isfinite(it->second)) {
                throw StructuralError("non-finite PMU angle for PV bus " + std::to_string(id));
            }
            const double vt = view.v_target[static_cast<std::size_t>(p)];
            st.voltages[static_cast<std::size_t>(p)] = {vt * std::cos(it->second),
                                                        vt * std::sin(it->second)};
        }
    }

    // The matrix is constant (factor once, substitute many) when nothing
    // state-dependent lives in it: always for CiPmu, and for CiLinear on an
    // all-PQ case. CiNewton and CiLinear-with-PV rebuild per iteration.
    const bool constant_matrix =
        method == Method::CiPmu || (method == Method::CiLinear && view.pv_pos.empty());

    std::optional<Factorization> fact;
    bool converged = false;
    std::string failure;

    try {
        for (;;) {
            const std::vector<RectCurrent> res = residual(view, st);
            const double norm = detail::mismatch_norm(view, res, method == Method::CiPmu);
            st.trace.push_back(norm);
            if (!std::isfinite(norm)) {
                failure = "diverged: non-finite current mismatch";
                break;
            }
            if (norm < opts.tolerance) {
                converged = true;
                break;
            }
            if (st.iteration >= opts.max_iterations) {
                failure = "did not converge within " + std::to_string(opts.max_iterations) +
                          " iterations";
                break;
            }

            if (!fact.has_value() || !constant_matrix) {
                fact = factorize(build_matrix(view, st, method, map));
                ++st.factorizations_used;
            }

            std::vector<double> rhs(static_cast<std::size_t>(map.dim), 0.0);
            for (int p = 0; p < view.index.size(); ++p) {
                const int c = map.col_of[static_cast<std::size_t>(p)];
                if (c < 0) continue;
                rhs[static_cast<std::size_t>(c)] = res[static_cast<std::size_t>(p)].ix;
                rhs[static_cast<std::size_t>(c) + 1] = res[static_cast<std::size_t>(p)].iy;
            }
            std::vector<double> dx = fact->solve(rhs);
            if (method == Method::CiLinear) {
                // The stationary iteration has no curvature information; far
                // from the fixed point a full step can leave the contraction
                // basin. Cap the step length, which leaves local linear
                // convergence untouched.
                constexpr double kStepCap = 0.25;
                double mx = 0.0;
                for (const double d : dx) mx = std::max(mx, std::abs(d));
                if (mx > kStepCap) {
                    const double scale = kStepCap / mx;
                    for (double& d : dx) d *= scale;
                }
            }
            apply_update(view, map, dx, st);
            ++st.iteration;
        }
    } catch (const Error& e) {
        failure = e.what();
        converged = false;
    }

    return detail::finish_report(view, st, method, opts, converged, failure, t0);
}

}  // namespace

SolutionReport solve_ci_newton(const NetworkCase& net, const SolverOptions& opts) {
    return run_ci(net, opts, Method::CiNewton, nullptr);
}

SolutionReport solve_ci_linear(const NetworkCase& net, const SolverOptions& opts) {
    return run_ci(net, opts, Method::CiLinear, nullptr);
}

SolutionReport solve_ci_pmu(const NetworkCase& net, const PmuAngleSet& pmu,
                            const SolverOptions& opts) {
    return run_ci(net, opts, Method::CiPmu, &pmu);
}

SparseMatrix build_ci_matrix(const NetworkCase& net, const YBus& y, const SolverState& state,
                             Method method) {
    (void)y;  // the view assembles an identical matrix from the case
    const CaseView view(net);
    return build_matrix(view, state, method, make_map(view, method));
}

}  // namespace ciflow
