#pragma once

#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "ciflow/caseio.hpp"
#include "ciflow/network.hpp"

namespace testutil {

inline std::string data_path(const std::string& name) {
    return std::string(CIFLOW_DATA_DIR) + "/" + name;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

inline ciflow::NetworkCase load_ieee14() {
    static const ciflow::NetworkCase net = ciflow::parse_cdf(read_file(data_path("ieee14.cdf")));
    return net;
}

inline ciflow::NetworkCase load_ieee118() {
    static const ciflow::NetworkCase net = ciflow::parse_cdf(read_file(data_path("ieee118.cdf")));
    return net;
}

/// Two-bus case: slack (id 1) -- line r+jx -- PQ load bus (id 2).
inline ciflow::NetworkCase two_bus(double r, double x, double p_load, double q_load,
                                   double v_slack = 1.0) {
    ciflow::NetworkCase net;
    net.name = "two-bus";
    net.buses.push_back({1, ciflow::BusKind::Slack, v_slack, 0.0, 0.0, 0.0});
    net.buses.push_back({2, ciflow::BusKind::Pq, 1.0, 0.0, 0.0, 0.0});
    net.branches.push_back({1, 2, r, x, 0.0, 1.0, ciflow::BranchKind::Line});
    if (p_load != 0.0 || q_load != 0.0) net.loads.push_back({2, p_load, q_load});
    return net;
}

/// Radial 3-bus all-PQ chain: slack 1 -- 2 -- 3 with loads at 2 and 3.
inline ciflow::NetworkCase radial_three_bus() {
    ciflow::NetworkCase net;
    net.name = "radial-3";
    net.buses.push_back({1, ciflow::BusKind::Slack, 1.02, 0.0, 0.0, 0.0});
    net.buses.push_back({2, ciflow::BusKind::Pq, 1.0, 0.0, 0.0, 0.0});
    net.buses.push_back({3, ciflow::BusKind::Pq, 1.0, 0.0, 0.0, 0.0});
    net.branches.push_back({1, 2, 0.02, 0.08, 0.02, 1.0, ciflow::BranchKind::Line});
    net.branches.push_back({2, 3, 0.04, 0.12, 0.01, 1.0, ciflow::BranchKind::Line});
    net.loads.push_back({2, 0.3, 0.1});
    net.loads.push_back({3, 0.2, 0.05});
    return net;
}

/// Deterministic uniform double in [lo, hi).
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace testutil
