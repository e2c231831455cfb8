#include "solver_internal.hpp"

#include <algorithm>
#include <cmath>

#include "ciflow/validate.hpp"

namespace ciflow {

std::string method_name(Method m) {
    switch (m) {
        case Method::ConventionalNr: return "conventional-nr";
        case Method::CiNewton: return "ci-newton";
        case Method::CiLinear: return "ci-linear";
        case Method::CiPmu: return "ci-pmu";
    }
    return "unknown";
}

std::optional<Method> method_from_name(const std::string& name) {
    if (name == "conventional" || name == "conventional-nr") return Method::ConventionalNr;
    if (name == "ci-newton") return Method::CiNewton;
    if (name == "ci-linear") return Method::CiLinear;
    if (name == "ci-pmu") return Method::CiPmu;
    return std::nullopt;
}

namespace detail {

CaseView::CaseView(const NetworkCase& n) : net(&n), index(n), y(assemble_ybus(n)) {
    const int nb = index.size();
    kind.resize(static_cast<std::size_t>(nb));
    v_target.assign(static_cast<std::size_t>(nb), 1.0);
    angle_init.assign(static_cast<std::size_t>(nb), 0.0);
    sched.assign(static_cast<std::size_t>(nb), {});
    q_load.assign(static_cast<std::size_t>(nb), 0.0);
    p_load.assign(static_cast<std::size_t>(nb), 0.0);
    pv_ordinal.assign(static_cast<std::size_t>(nb), -1);

    for (int p = 0; p < nb; ++p) {
        const Bus& b = n.buses[static_cast<std::size_t>(p)];
        kind[static_cast<std::size_t>(p)] = b.kind;
        v_target[static_cast<std::size_t>(p)] = b.v_target;
        angle_init[static_cast<std::size_t>(p)] = b.angle_init;
        if (b.kind == BusKind::Slack) slack = p;
        if (b.kind == BusKind::Pv) {
            pv_ordinal[static_cast<std::size_t>(p)] = static_cast<int>(pv_pos.size());
            pv_pos.push_back(p);
        }
        if (b.kind == BusKind::Pq) pq_pos.push_back(p);
    }
    for (const Generator& g : n.generators) {
        const int p = index.at(g.bus);
        sched[static_cast<std::size_t>(p)].p_s += g.p_g;
        sched[static_cast<std::size_t>(p)].q_s += g.q_g;
    }
    for (const Load& l : n.loads) {
        const int p = index.at(l.bus);
        sched[static_cast<std::size_t>(p)].p_s -= l.p_l;
        sched[static_cast<std::size_t>(p)].q_s -= l.q_l;
        p_load[static_cast<std::size_t>(p)] += l.p_l;
        q_load[static_cast<std::size_t>(p)] += l.q_l;
    }
}

SolverState flat_start(const CaseView& view, const SolverOptions& opts) {
    const int nb = view.index.size();
    SolverState st;
    st.voltages.resize(static_cast<std::size_t>(nb));
    st.q_s_pv.assign(view.pv_pos.size(), 0.0);
    for (int p = 0; p < nb; ++p) {
        const double ang = (view.kind[static_cast<std::size_t>(p)] == BusKind::Slack ||
                            !opts.flat_start)
                               ? view.angle_init[static_cast<std::size_t>(p)]
                               : 0.0;
        const double mag = view.kind[static_cast<std::size_t>(p)] == BusKind::Pq
                               ? 1.0
                               : view.v_target[static_cast<std::size_t>(p)];
        st.voltages[static_cast<std::size_t>(p)] = {mag * std::cos(ang), mag * std::sin(ang)};
    }
    return st;
}

double mismatch_norm(const CaseView& view, std::span<const RectCurrent> residual,
                     bool pq_rows_only) {
    double norm = 0.0;
    for (int p = 0; p < view.index.size(); ++p) {
        const BusKind k = view.kind[static_cast<std::size_t>(p)];
        if (k == BusKind::Slack) continue;
        if (pq_rows_only && k != BusKind::Pq) continue;
        norm = std::max(norm, std::abs(residual[static_cast<std::size_t>(p)].ix));
        norm = std::max(norm, std::abs(residual[static_cast<std::size_t>(p)].iy));
    }
    return norm;
}

std::vector<RectVoltage> to_rect(std::span<const double> vm, std::span<const double> va) {
    std::vector<RectVoltage> out(vm.size());
    for (std::size_t i = 0; i < vm.size(); ++i) {
        out[i] = {vm[i] * std::cos(va[i]), vm[i] * std::sin(va[i])};
    }
    return out;
}

SolutionReport finish_report(const CaseView& view, const SolverState& state, Method method,
                             const SolverOptions& opts, bool converged,
                             const std::string& failure, Clock::time_point t0) {
    SolutionReport rep;
    rep.method = method_name(method);
    rep.case_name = view.net->name;
    rep.converged = converged;
    rep.iterations = state.iteration;
    rep.factorizations = state.factorizations_used;
    rep.trace = state.trace;
    rep.max_mismatch = state.trace.empty() ? 0.0 : state.trace.back();
    rep.tolerance = opts.tolerance;
    rep.failure = failure;

    const int nb = view.index.size();
    std::vector<Complex> v(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        v[static_cast<std::size_t>(p)] = {state.voltages[static_cast<std::size_t>(p)].vx,
                                          state.voltages[static_cast<std::size_t>(p)].vy};
    }
    const std::vector<Complex> inj = view.y.multiply(v);
    rep.buses.resize(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        const Complex s = v[static_cast<std::size_t>(p)] * std::conj(inj[static_cast<std::size_t>(p)]);
        rep.buses[static_cast<std::size_t>(p)] = {view.index.id_of(p),
                                                  std::abs(v[static_cast<std::size_t>(p)]),
                                                  std::arg(v[static_cast<std::size_t>(p)]),
                                                  s.real(), s.imag()};
    }
    rep.generators = recover_outputs(*view.net, view.y, state.voltages);
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    return rep;
}

}  // namespace detail

std::vector<RectCurrent> mismatch(const NetworkCase& net, const YBus& y,
                                  const SolverState& state) {
    const detail::CaseView view(net);
    const int nb = view.index.size();
    std::vector<Complex> v(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        v[static_cast<std::size_t>(p)] = {state.voltages[static_cast<std::size_t>(p)].vx,
                                          state.voltages[static_cast<std::size_t>(p)].vy};
    }
    const std::vector<Complex> yv = y.multiply(v);
    std::vector<RectCurrent> res(static_cast<std::size_t>(nb));
    for (int p = 0; p < nb; ++p) {
        const RectVoltage& vp = state.voltages[static_cast<std::size_t>(p)];
        RectCurrent i;
        if (view.kind[static_cast<std::size_t>(p)] == BusKind::Pv) {
            const int k = view.pv_ordinal[static_cast<std::size_t>(p)];
            NetInjection s{view.sched[static_cast<std::size_t>(p)].p_s,
                           state.q_s_pv[static_cast<std::size_t>(k)]};
            i = pv_injection_current(s, view.v_target[static_cast<std::size_t>(p)], vp.vy);
        } else {
            i = injection_current(view.sched[static_cast<std::size_t>(p)], vp);
        }
        res[static_cast<std::size_t>(p)] = {i.ix - yv[static_cast<std::size_t>(p)].real(),
                                            i.iy - yv[static_cast<std::size_t>(p)].imag()};
    }
    return res;
}

std::vector<Complex> bus_injections(const YBus& y, std::span<const RectVoltage> v) {
    std::vector<Complex> vc(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) vc[i] = {v[i].vx, v[i].vy};
    std::vector<Complex> iv = y.multiply(vc);
    std::vector<Complex> s(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s[i] = vc[i] * std::conj(iv[i]);
    return s;
}

std::vector<GenRecord> recover_outputs(const NetworkCase& net, const YBus& y,
                                       std::span<const RectVoltage> v) {
    const BusIndex index(net);
    const std::vector<Complex> s = bus_injections(y, v);

    std::vector<double> p_load(net.buses.size(), 0.0), q_load(net.buses.size(), 0.0);
    for (const Load& l : net.loads) {
        const int p = index.at(l.bus);
        p_load[static_cast<std::size_t>(p)] += l.p_l;
        q_load[static_cast<std::size_t>(p)] += l.q_l;
    }

    // Group generators by bus, preserving input order within the group.
    std::vector<std::vector<std::size_t>> by_bus(net.buses.size());
    for (std::size_t g = 0; g < net.generators.size(); ++g) {
        by_bus[static_cast<std::size_t>(index.at(net.generators[g].bus))].push_back(g);
    }

    std::vector<GenRecord> out(net.generators.size());
    for (std::size_t p = 0; p < net.buses.size(); ++p) {
        const auto& gens = by_bus[p];
        if (gens.empty()) continue;
        const Bus& bus = net.buses[p];
        if (bus.kind == BusKind::Pq) {
            for (std::size_t g : gens) {
                out[g] = {net.generators[g].bus, net.generators[g].p_g, net.generators[g].q_g};
            }
            continue;
        }
        const double p_needed = s[p].real() + p_load[p];
        const double q_needed = s[p].imag() + q_load[p];
        double p_sched = 0.0;
        double range = 0.0;
        for (std::size_t g : gens) {
            p_sched += net.generators[g].p_g;
            range += net.generators[g].q_max - net.generators[g].q_min;
        }
        const double p_extra = (p_needed - p_sched) / static_cast<double>(gens.size());
        for (std::size_t g : gens) {
            const Generator& gen = net.generators[g];
            const double w = range > 0.0 ? (gen.q_max - gen.q_min) / range
                                         : 1.0 / static_cast<double>(gens.size());
            out[g] = {gen.bus, gen.p_g + p_extra, q_needed * w};
        }
    }
    return out;
}

std::vector<QLimitEvent> check_q_limits(const NetworkCase& net, const YBus& y,
                                        std::span<const RectVoltage> v) {
    const BusIndex index(net);
    const std::vector<Complex> s = bus_injections(y, v);
    std::vector<double> q_load(net.buses.size(), 0.0);
    for (const Load& l : net.loads) q_load[static_cast<std::size_t>(index.at(l.bus))] += l.q_l;

    std::vector<double> q_min(net.buses.size(), 0.0), q_max(net.buses.size(), 0.0);
    std::vector<bool> has_gen(net.buses.size(), false);
    for (const Generator& g : net.generators) {
        const auto p = static_cast<std::size_t>(index.at(g.bus));
        q_min[p] += g.q_min;
        q_max[p] += g.q_max;
        has_gen[p] = true;
    }

    std::vector<QLimitEvent> events;
    constexpr double eps = 1e-9;
    for (std::size_t p = 0; p < net.buses.size(); ++p) {
        if (net.buses[p].kind != BusKind::Pv || !has_gen[p]) continue;
        const double q_g = s[p].imag() + q_load[p];
        if (q_g > q_max[p] + eps) {
            events.push_back({net.buses[p].id, q_max[p], true});
        } else if (q_g < q_min[p] - eps) {
            events.push_back({net.buses[p].id, q_min[p], false});
        }
    }
    return events;
}

namespace {

/// Switch each violated PV bus to PQ with its generators clamped at the
/// violated limit, so net_power carries the clamp from then on.
NetworkCase apply_q_events(const NetworkCase& net, const std::vector<QLimitEvent>& events) {
    NetworkCase out = net;
    for (const QLimitEvent& e : events) {
        for (Bus& b : out.buses) {
            if (b.id == e.bus) b.kind = BusKind::Pq;
        }
        for (Generator& g : out.generators) {
            if (g.bus == e.bus) g.q_g = e.at_max ? g.q_max : g.q_min;
        }
    }
    return out;
}

SolutionReport solve_once(const NetworkCase& net, const SolverOptions& opts,
                          const PmuAngleSet* pmu) {
    switch (opts.method) {
        case Method::ConventionalNr: return solve_conventional_nr(net, opts);
        case Method::CiNewton: return solve_ci_newton(net, opts);
        case Method::CiLinear: return solve_ci_linear(net, opts);
        case Method::CiPmu:
            if (pmu == nullptr) {
                throw StructuralError("ci-pmu requires a PMU angle set");
            }
            return solve_ci_pmu(net, *pmu, opts);
    }
    throw Error("unknown method");
}

}  // namespace

SolutionReport solve(const NetworkCase& net, const SolverOptions& opts, const PmuAngleSet* pmu) {
    SolverOptions inner = opts;
    inner.enforce_q_limits = false;

    NetworkCase working = net;
    std::vector<QLimitEvent> all_events;
    const int max_passes =
        1 + static_cast<int>(std::count_if(net.buses.begin(), net.buses.end(),
                                           [](const Bus& b) { return b.kind == BusKind::Pv; }));

    SolutionReport rep;
    for (int pass = 0; pass < max_passes; ++pass) {
        rep = solve_once(working, inner, pmu);
        rep.q_events = all_events;
        if (!opts.enforce_q_limits || !rep.converged) return rep;

        const detail::CaseView view(working);
        std::vector<RectVoltage> v(rep.buses.size());
        for (std::size_t i = 0; i < rep.buses.size(); ++i) {
            v[i] = {rep.buses[i].vm * std::cos(rep.buses[i].va),
                    rep.buses[i].vm * std::sin(rep.buses[i].va)};
        }
        const std::vector<QLimitEvent> events = check_q_limits(working, view.y, v);
        if (events.empty()) return rep;
        working = apply_q_events(working, events);
        all_events.insert(all_events.end(), events.begin(), events.end());
    }
    rep.converged = false;
    rep.failure = "reactive limit switching did not settle within " +
                  std::to_string(max_passes) + " passes";
    rep.q_events = all_events;
    return rep;
}

}  // namespace ciflow
