#include "ciflow/pmu.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace ciflow {

namespace {

/// Uniform draw on (-1, 1), identical on every platform for a given engine
/// state (std::uniform_real_distribution is not portable across libraries).
double symmetric_uniform(std::mt19937_64& rng) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;  // [0, 1)
    return 2.0 * u - 1.0;
}

double apply_error(double angle, double eps, AngleErrorForm form) {
    return form == AngleErrorForm::RelativeFraction ? angle * (1.0 + eps) : angle + eps;
}

}  // namespace

std::string scenario_label(const PmuScenario& s) {
    switch (s.mode) {
        case PmuMode::Exact: return "exact";
        case PmuMode::WorstPositive: return "worst+";
        case PmuMode::WorstNegative: return "worst-";
        case PmuMode::Random: return "random";
        case PmuMode::RandomIndependent: return "random-indep";
    }
    return "?";
}

PmuAngleSet simulate_pmu(const PmuAngleSet& true_angles, const PmuScenario& scenario) {
    PmuAngleSet out;
    switch (scenario.mode) {
        case PmuMode::Exact:
            out = true_angles;
            break;
        case PmuMode::WorstPositive:
        case PmuMode::WorstNegative: {
            const double eps = scenario.mode == PmuMode::WorstPositive ? scenario.tve_fraction
                                                                       : -scenario.tve_fraction;
            for (const auto& [bus, angle] : true_angles) {
                out[bus] = apply_error(angle, eps, scenario.form);
            }
            break;
        }
        case PmuMode::Random: {
            // One draw shared by every PMU in this scenario instance.
            std::mt19937_64 rng(scenario.seed);
            const double eps = symmetric_uniform(rng) * scenario.tve_fraction;
            for (const auto& [bus, angle] : true_angles) {
                out[bus] = apply_error(angle, eps, scenario.form);
            }
            break;
        }
        case PmuMode::RandomIndependent: {
            std::mt19937_64 rng(scenario.seed);
            for (const auto& [bus, angle] : true_angles) {
                const double eps = symmetric_uniform(rng) * scenario.tve_fraction;
                out[bus] = apply_error(angle, eps, scenario.form);
            }
            break;
        }
    }
    return out;
}

ErrorMetrics error_metrics(const SolutionReport& reference, const SolutionReport& candidate,
                           const std::set<int>& pinned) {
    if (reference.buses.size() != candidate.buses.size()) {
        throw StructuralError("error_metrics: reports cover different bus sets");
    }
    std::map<int, const BusRecord*> cand;
    for (const BusRecord& b : candidate.buses) cand[b.id] = &b;

    ErrorMetrics m;
    std::vector<std::pair<int, std::pair<double, double>>> rows;
    for (const BusRecord& rb : reference.buses) {
        const auto it = cand.find(rb.id);
        if (it == cand.end()) {
            throw StructuralError("error_metrics: bus " + std::to_string(rb.id) +
                                  " missing from candidate");
        }
        const double dvm = std::abs(rb.vm - it->second->vm);
        const double dva = std::abs(rb.va - it->second->va);
        rows.push_back({rb.id, {dvm, dva}});
    }
    std::sort(rows.begin(), rows.end());

    int counted = 0;
    for (const auto& [id, err] : rows) {
        m.bus_ids.push_back(id);
        m.abs_vm.push_back(err.first);
        m.abs_va.push_back(err.second);
        if (pinned.count(id) > 0) continue;
        m.max_abs_vm = std::max(m.max_abs_vm, err.first);
        m.max_abs_va = std::max(m.max_abs_va, err.second);
        m.mean_abs_vm += err.first;
        m.mean_abs_va += err.second;
        ++counted;
    }
    if (counted > 0) {
        m.mean_abs_vm /= counted;
        m.mean_abs_va /= counted;
    }
    return m;
}

std::vector<ScenarioRow> run_accuracy_experiment(const NetworkCase& net,
                                                 const std::vector<PmuScenario>& scenarios,
                                                 const SolverOptions& opts) {
    std::vector<ScenarioRow> rows;

    SolverOptions oracle_opts = opts;
    oracle_opts.method = Method::ConventionalNr;
    const SolutionReport oracle = solve(net, oracle_opts);
    if (!oracle.converged) {
        ScenarioRow row;
        row.system = net.name;
        row.scenario = "(oracle)";
        row.error = "oracle solve failed: " + oracle.failure;
        return {row};
    }

    // True PV angles and the pinned-bus set come from the oracle solution.
    PmuAngleSet true_angles;
    std::set<int> pinned;
    {
        const BusIndex index(net);
        for (const Bus& b : net.buses) {
            if (b.kind == BusKind::Pv) {
                pinned.insert(b.id);
                for (const BusRecord& r : oracle.buses) {
                    if (r.id == b.id) true_angles[b.id] = r.va;
                }
            }
            if (b.kind == BusKind::Slack) pinned.insert(b.id);
        }
    }

    for (const PmuScenario& sc : scenarios) {
        ScenarioRow row;
        row.system = net.name;
        row.scenario = scenario_label(sc);
        try {
            const PmuAngleSet measured = simulate_pmu(true_angles, sc);
            SolverOptions pmu_opts = opts;
            pmu_opts.method = Method::CiPmu;
            const SolutionReport rep = solve(net, pmu_opts, &measured);
            if (!rep.converged) {
                row.error = "ci-pmu solve failed: " + rep.failure;
            } else {
                row.metrics = error_metrics(oracle, rep, pinned);
                row.ok = true;
            }
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

ErrorMetrics mean_metrics(const std::vector<ScenarioRow>& rows) {
    ErrorMetrics m;
    int n = 0;
    for (const ScenarioRow& r : rows) {
        if (!r.ok) continue;
        if (m.bus_ids.empty()) {
            m.bus_ids = r.metrics.bus_ids;
            m.abs_vm.assign(m.bus_ids.size(), 0.0);
            m.abs_va.assign(m.bus_ids.size(), 0.0);
        }
        m.max_abs_vm += r.metrics.max_abs_vm;
        m.max_abs_va += r.metrics.max_abs_va;
        m.mean_abs_vm += r.metrics.mean_abs_vm;
        m.mean_abs_va += r.metrics.mean_abs_va;
        for (std::size_t i = 0; i < m.abs_vm.size(); ++i) {
            m.abs_vm[i] += r.metrics.abs_vm[i];
            m.abs_va[i] += r.metrics.abs_va[i];
        }
        ++n;
    }
    if (n > 0) {
        m.max_abs_vm /= n;
        m.max_abs_va /= n;
        m.mean_abs_vm /= n;
        m.mean_abs_va /= n;
        for (std::size_t i = 0; i < m.abs_vm.size(); ++i) {
            m.abs_vm[i] /= n;
            m.abs_va[i] /= n;
        }
    }
    return m;
}

void emit_plot_data(const ErrorMetrics& metrics, const std::string& path_prefix) {
    auto write_one = [&](const std::string& path, const std::vector<double>& values) {
        std::ofstream out(path);
        if (!out) throw Error("cannot write " + path);
        out << "bus,abs_error\n";
        char buf[64];
        for (std::size_t i = 0; i < metrics.bus_ids.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.9e", values[i]);
            out << metrics.bus_ids[i] << ',' << buf << "\n";
        }
    };
    write_one(path_prefix + "_vm.csv", metrics.abs_vm);
    write_one(path_prefix + "_va.csv", metrics.abs_va);
}

}  // namespace ciflow
