#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "ciflow/solvers.hpp"

namespace ciflow {

enum class PmuMode {
    Exact,              // pass the true angles through
    WorstPositive,      // every angle at +tve error
    WorstNegative,      // every angle at -tve error
    Random,             // one uniform draw on (-tve, +tve) shared by all PMUs
    RandomIndependent,  // an independent uniform draw per PMU
};

/// How a TVE fraction turns into an angle error. Relative scales the measured
/// angle by (1 + e); Absolute shifts it by e radians. A pure phase error e
/// gives TVE = 2 sin(e/2) ~ e, so tve_fraction 0.01 is the 1% compliance bound
/// either way.
enum class AngleErrorForm { RelativeFraction, AbsoluteRadians };

struct PmuScenario {
    PmuMode mode = PmuMode::Exact;
    double tve_fraction = 0.01;
    std::uint64_t seed = 0;
    AngleErrorForm form = AngleErrorForm::RelativeFraction;
};

std::string scenario_label(const PmuScenario& s);

/// Apply the scenario's measurement error to oracle-true PV angles.
/// Deterministic for a given (scenario, seed).
PmuAngleSet simulate_pmu(const PmuAngleSet& true_angles, const PmuScenario& scenario);

/// Per-bus absolute voltage errors between two solved reports on the same bus
/// set. The per-bus vectors cover every bus in ascending external id; the
/// max/mean summaries skip `pinned` buses (whose voltage was an input of the
/// candidate method, not a solved quantity).
struct ErrorMetrics {
    double max_abs_vm = 0.0;
    double max_abs_va = 0.0;
    double mean_abs_vm = 0.0;
    double mean_abs_va = 0.0;
    std::vector<int> bus_ids;
    std::vector<double> abs_vm;
    std::vector<double> abs_va;
};

ErrorMetrics error_metrics(const SolutionReport& reference, const SolutionReport& candidate,
                           const std::set<int>& pinned = {});

struct ScenarioRow {
    std::string system;
    std::string scenario;
    bool ok = false;
    std::string error;
    ErrorMetrics metrics;
};

/// Oracle solve -> simulate_pmu -> PMU-pinned solve -> error metrics, once per
/// scenario. Solver failures are recorded in the row, not thrown.
std::vector<ScenarioRow> run_accuracy_experiment(const NetworkCase& net,
                                                 const std::vector<PmuScenario>& scenarios,
                                                 const SolverOptions& opts = {});

/// Mean of each metric across rows (seed sweeps aggregate with this).
ErrorMetrics mean_metrics(const std::vector<ScenarioRow>& rows);

/// Two CSV files (<prefix>_vm.csv, <prefix>_va.csv), rows bus_id,abs_error in
/// ascending external id.
void emit_plot_data(const ErrorMetrics& metrics, const std::string& path_prefix);

}  // namespace ciflow
