#pragma once

#include <string>
#include <vector>

#include "ciflow/network.hpp"

namespace ciflow {

struct BusRecord {
    int id = 0;
    double vm = 0.0;      // p.u.
    double va = 0.0;      // radians
    double p_inj = 0.0;   // p.u. net injection at the solved point
    double q_inj = 0.0;
};

struct GenRecord {
    int bus = 0;
    double p_g = 0.0;
    double q_g = 0.0;
};

struct QLimitEvent {
    int bus = 0;
    double clamped_q = 0.0;
    bool at_max = false;
};

struct SolutionReport {
    std::string method;
    std::string case_name;
    bool converged = false;
    int iterations = 0;
    int factorizations = 0;
    double max_mismatch = 0.0;        // final value of the method's own norm
    double tolerance = 0.0;
    double wall_ms = 0.0;
    std::vector<double> trace;        // per-iteration max mismatch
    std::vector<BusRecord> buses;     // one per bus, input order
    std::vector<GenRecord> generators;
    std::vector<QLimitEvent> q_events;
    std::string failure;              // diagnostic when not converged
};

enum class ReportFormat { Json, Csv };

/// Parse the IEEE Common Data Format (1973), bus and branch sections. Fields
/// are read by fixed character ranges, not whitespace. MW/MVAR columns are
/// normalized by the title-card MVA base.
NetworkCase parse_cdf(const std::string& text);

/// Parse the native JSON case schema:
///   {name, base_mva, buses[], branches[], generators[], loads[]}
NetworkCase parse_native(const std::string& text);

/// Serialize to the native JSON schema; parse_native(serialize_case(c)) == c.
std::string serialize_case(const NetworkCase& net);

/// Render a report. CSV: `# key=value` metadata lines, then
/// `bus,vm_pu,va_rad,p_pu,q_pu` rows. Deterministic for a given report.
std::string write_solution(const SolutionReport& report, ReportFormat format);

}  // namespace ciflow
