#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ciflow/caseio.hpp"
#include "ciflow/injections.hpp"
#include "ciflow/network.hpp"
#include "ciflow/ybus.hpp"

namespace ciflow {

enum class Method { ConventionalNr, CiNewton, CiLinear, CiPmu };

std::string method_name(Method m);
std::optional<Method> method_from_name(const std::string& name);

struct SolverOptions {
    double tolerance = 1e-8;        // max-norm of the method's own mismatch
    int max_iterations = 50;
    bool flat_start = true;
    bool enforce_q_limits = false;
    Method method = Method::CiNewton;
};

/// Measured PV-bus voltage phase angles, radians, keyed by external bus id.
using PmuAngleSet = std::map<int, double>;

/// Iterate state shared by the current-injection methods. Voltages are in
/// internal bus order; q_s_pv holds the reactive net-injection unknowns for
/// PV buses in internal order.
struct SolverState {
    std::vector<RectVoltage> voltages;
    std::vector<double> q_s_pv;
    int iteration = 0;
    std::vector<double> trace;
    int factorizations_used = 0;
};

/// Current residual dI = I(V) - Y V per bus. Slack entries are computed but
/// excluded from every convergence norm; PV entries use the state's q_s
/// iterate in the magnitude-constrained injection.
std::vector<RectCurrent> mismatch(const NetworkCase& net, const YBus& y,
                                  const SolverState& state);

/// Polar power-mismatch Newton-Raphson. The in-repo oracle for cross-method
/// checks; rebuilds and refactorizes its Jacobian every iteration.
SolutionReport solve_conventional_nr(const NetworkCase& net, const SolverOptions& opts = {});

/// Rectangular current-injection Newton: injection derivatives in the matrix,
/// PV buses carry (dQ, dVy) unknown pairs. Refactorizes every iteration.
SolutionReport solve_ci_newton(const NetworkCase& net, const SolverOptions& opts = {});

/// Current-injection iteration with PQ nonlinearity on the right-hand side
/// only. With PV buses present the PV column terms are state-dependent and the
/// matrix is rebuilt each iteration; an all-PQ case factorizes exactly once.
SolutionReport solve_ci_linear(const NetworkCase& net, const SolverOptions& opts = {});

/// PMU-pinned method: every PV bus voltage is fixed to v_target at the
/// measured angle, PV and slack rows/columns leave the system, and the
/// reduced PQ matrix is factorized exactly once for the whole solve.
SolutionReport solve_ci_pmu(const NetworkCase& net, const PmuAngleSet& pmu,
                            const SolverOptions& opts = {});

/// Dispatch on opts.method. CiPmu requires `pmu`.
SolutionReport solve(const NetworkCase& net, const SolverOptions& opts,
                     const PmuAngleSet* pmu = nullptr);

/// Bus injections S = V conj(Y V) for a solved voltage set, internal order.
std::vector<Complex> bus_injections(const YBus& y, std::span<const RectVoltage> v);

/// Close the power balance at slack/PV buses: bus injection plus local load,
/// allocated to the generators there (Q split by reactive range when a bus
/// carries several machines).
std::vector<GenRecord> recover_outputs(const NetworkCase& net, const YBus& y,
                                       std::span<const RectVoltage> v);

/// PV buses whose recovered Q_g violates its limits, with the clamp applied.
std::vector<QLimitEvent> check_q_limits(const NetworkCase& net, const YBus& y,
                                        std::span<const RectVoltage> v);

/// The update-equation matrix of a current-injection method at a given state
/// (exposed so tests can assert when it is constant across iterations).
SparseMatrix build_ci_matrix(const NetworkCase& net, const YBus& y,
                             const SolverState& state, Method method);

}  // namespace ciflow
