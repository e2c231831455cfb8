#pragma once

#include <chrono>
#include <vector>

#include "ciflow/solvers.hpp"

namespace ciflow::detail {

/// Everything a solve needs precomputed from the immutable case.
struct CaseView {
    const NetworkCase* net = nullptr;
    BusIndex index;
    YBus y;
    std::vector<BusKind> kind;         // by internal position
    std::vector<double> v_target;
    std::vector<double> angle_init;
    std::vector<NetInjection> sched;   // scheduled net power (PV q_s meaningless)
    std::vector<double> q_load;        // total reactive load per bus
    std::vector<double> p_load;
    std::vector<int> pv_pos;
    std::vector<int> pq_pos;
    std::vector<int> pv_ordinal;       // position -> rank in pv_pos, else -1
    int slack = -1;

    explicit CaseView(const NetworkCase& n);
};

SolverState flat_start(const CaseView& view, const SolverOptions& opts);

double mismatch_norm(const CaseView& view, std::span<const RectCurrent> residual,
                     bool pq_rows_only);

std::vector<RectVoltage> to_rect(std::span<const double> vm, std::span<const double> va);

/// Fill the per-bus records, recovered generator outputs and timing into a report.
SolutionReport finish_report(const CaseView& view, const SolverState& state, Method method,
                             const SolverOptions& opts, bool converged,
                             const std::string& failure,
                             std::chrono::steady_clock::time_point t0);

using Clock = std::chrono::steady_clock;

}  // namespace ciflow::detail
