#include <cmath>

#include "solver_internal.hpp"

namespace ciflow {

namespace {

using detail::CaseView;

struct PolarState {
    std::vector<double> vm;
    std::vector<double> va;
};

}  // namespace

// Power-mismatch Newton-Raphson in polar coordinates. Unknowns: angle at every
// non-slack bus, magnitude at PQ buses. The Jacobian is rebuilt and
// refactorized each iteration.
SolutionReport solve_conventional_nr(const NetworkCase& net, const SolverOptions& opts) {
    const auto t0 = detail::Clock::now();
    const CaseView view(net);
    const int nb = view.index.size();

    PolarState ps;
    ps.vm.resize(static_cast<std::size_t>(nb));
    ps.va.resize(static_cast<std::size_t>(nb));
    {
        const SolverState seed = detail::flat_start(view, opts);
        for (int p = 0; p < nb; ++p) {
            ps.vm[static_cast<std::size_t>(p)] = std::hypot(seed.voltages[static_cast<std::size_t>(p)].vx,
                                                            seed.voltages[static_cast<std::size_t>(p)].vy);
            ps.va[static_cast<std::size_t>(p)] = std::atan2(seed.voltages[static_cast<std::size_t>(p)].vy,
                                                            seed.voltages[static_cast<std::size_t>(p)].vx);
        }
    }

    // Unknown layout: angles for non-slack buses first, then PQ magnitudes.
    std::vector<int> ang_of(static_cast<std::size_t>(nb), -1);
    std::vector<int> mag_of(static_cast<std::size_t>(nb), -1);
    int dim = 0;
    for (int p = 0; p < nb; ++p) {
        if (view.kind[static_cast<std::size_t>(p)] != BusKind::Slack) ang_of[static_cast<std::size_t>(p)] = dim++;
    }
    for (int p : view.pq_pos) mag_of[static_cast<std::size_t>(p)] = dim++;

    SolverState st;
    st.q_s_pv.assign(view.pv_pos.size(), 0.0);
    bool converged = false;
    std::string failure;

    std::vector<double> p_calc(static_cast<std::size_t>(nb));
    std::vector<double> q_calc(static_cast<std::size_t>(nb));

    auto compute_power = [&]() {
        std::fill(p_calc.begin(), p_calc.end(), 0.0);
        std::fill(q_calc.begin(), q_calc.end(), 0.0);
        for (const YBus::Entry& e : view.y.entries()) {
            const auto i = static_cast<std::size_t>(e.row);
            const auto j = static_cast<std::size_t>(e.col);
            const double th = ps.va[i] - ps.va[j];
            const double vv = ps.vm[i] * ps.vm[j];
            p_calc[i] += vv * (e.y.real() * std::cos(th) + e.y.imag() * std::sin(th));
            q_calc[i] += vv * (e.y.real() * std::sin(th) - e.y.imag() * std::cos(th));
        }
    };

    try {
        for (;;) {
            compute_power();
            double norm = 0.0;
            for (int p = 0; p < nb; ++p) {
                const BusKind k = view.kind[static_cast<std::size_t>(p)];
                if (k == BusKind::Slack) continue;
                norm = std::max(norm, std::abs(view.sched[static_cast<std::size_t>(p)].p_s -
                                               p_calc[static_cast<std::size_t>(p)]));
                if (k == BusKind::Pq) {
                    norm = std::max(norm, std::abs(view.sched[static_cast<std::size_t>(p)].q_s -
                                                   q_calc[static_cast<std::size_t>(p)]));
                }
            }
            st.trace.push_back(norm);
            if (!std::isfinite(norm)) {
                failure = "diverged: non-finite power mismatch";
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

            SparseMatrix jac(dim);
            for (const YBus::Entry& e : view.y.entries()) {
                const auto i = static_cast<std::size_t>(e.row);
                const auto j = static_cast<std::size_t>(e.col);
                const BusKind ki = view.kind[i];
                if (ki == BusKind::Slack) continue;
                const int rp = ang_of[i];
                const int rq = mag_of[i];
                const double g = e.y.real();
                const double b = e.y.imag();
                if (e.row == e.col) {
                    const double vi = ps.vm[i];
                    if (rp >= 0) {
                        jac.add(rp, ang_of[i], -q_calc[i] - b * vi * vi);
                        if (mag_of[i] >= 0) jac.add(rp, mag_of[i], p_calc[i] / vi + g * vi);
                    }
                    if (rq >= 0) {
                        jac.add(rq, ang_of[i], p_calc[i] - g * vi * vi);
                        jac.add(rq, mag_of[i], q_calc[i] / vi - b * vi);
                    }
                    continue;
                }
                if (view.kind[j] == BusKind::Slack && mag_of[j] < 0 && ang_of[j] < 0) {
                    continue;  // both slack columns are fixed
                }
                const double th = ps.va[i] - ps.va[j];
                const double vv = ps.vm[i] * ps.vm[j];
                const double en = vv * (g * std::cos(th) + b * std::sin(th));
                const double hf = vv * (g * std::sin(th) - b * std::cos(th));
                if (rp >= 0) {
                    if (ang_of[j] >= 0) jac.add(rp, ang_of[j], hf);
                    if (mag_of[j] >= 0) jac.add(rp, mag_of[j], en / ps.vm[j]);
                }
                if (rq >= 0) {
                    if (ang_of[j] >= 0) jac.add(rq, ang_of[j], -en);
                    if (mag_of[j] >= 0) jac.add(rq, mag_of[j], hf / ps.vm[j]);
                }
            }
            jac.finalize();

            std::vector<double> rhs(static_cast<std::size_t>(dim), 0.0);
            for (int p = 0; p < nb; ++p) {
                if (ang_of[static_cast<std::size_t>(p)] >= 0) {
                    rhs[static_cast<std::size_t>(ang_of[static_cast<std::size_t>(p)])] =
                        view.sched[static_cast<std::size_t>(p)].p_s - p_calc[static_cast<std::size_t>(p)];
                }
                if (mag_of[static_cast<std::size_t>(p)] >= 0) {
                    rhs[static_cast<std::size_t>(mag_of[static_cast<std::size_t>(p)])] =
                        view.sched[static_cast<std::size_t>(p)].q_s - q_calc[static_cast<std::size_t>(p)];
                }
            }

            const Factorization f = factorize(jac);
            ++st.factorizations_used;
            const std::vector<double> dx = f.solve(rhs);
            for (int p = 0; p < nb; ++p) {
                if (ang_of[static_cast<std::size_t>(p)] >= 0) {
                    ps.va[static_cast<std::size_t>(p)] +=
                        dx[static_cast<std::size_t>(ang_of[static_cast<std::size_t>(p)])];
                }
                if (mag_of[static_cast<std::size_t>(p)] >= 0) {
                    ps.vm[static_cast<std::size_t>(p)] +=
                        dx[static_cast<std::size_t>(mag_of[static_cast<std::size_t>(p)])];
                }
            }
            ++st.iteration;
        }
    } catch (const Error& e) {
        failure = e.what();
        converged = false;
    }

    st.voltages = detail::to_rect(ps.vm, ps.va);
    // Record the solved PV reactive injections so the state is self-consistent.
    for (std::size_t k = 0; k < view.pv_pos.size(); ++k) {
        st.q_s_pv[k] = q_calc[static_cast<std::size_t>(view.pv_pos[k])];
    }
    return detail::finish_report(view, st, Method::ConventionalNr, opts, converged, failure, t0);
}

}  // namespace ciflow
