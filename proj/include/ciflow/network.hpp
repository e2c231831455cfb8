#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ciflow/errors.hpp"

namespace ciflow {

enum class BusKind { Slack, Pv, Pq };

struct Bus {
    int id = 0;                 // external bus number
    BusKind kind = BusKind::Pq;
    double v_target = 1.0;      // |V| setpoint at slack/PV buses, p.u.
    double angle_init = 0.0;    // radians; fixes the slack angle
    double shunt_g = 0.0;       // p.u. conductance to ground
    double shunt_b = 0.0;       // p.u. susceptance to ground

    friend bool operator==(const Bus&, const Bus&) = default;
};

enum class BranchKind { Line, Transformer };

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double r = 0.0;             // p.u. series resistance
    double x = 0.0;             // p.u. series reactance
    double b_charging = 0.0;    // p.u. total line charging (lines only)
    double tap = 1.0;           // off-nominal turns ratio, applied on the from side
    BranchKind kind = BranchKind::Line;

    friend bool operator==(const Branch&, const Branch&) = default;
};

struct Generator {
    int bus = 0;
    double p_g = 0.0;
    double q_g = 0.0;           // solved quantity at PV/slack buses
    double q_min = 0.0;
    double q_max = 0.0;

    friend bool operator==(const Generator&, const Generator&) = default;
};

struct Load {
    int bus = 0;
    double p_l = 0.0;
    double q_l = 0.0;

    friend bool operator==(const Load&, const Load&) = default;
};

/// Immutable grid description. All quantities are per-unit on base_mva.
struct NetworkCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    std::vector<Load> loads;

    friend bool operator==(const NetworkCase&, const NetworkCase&) = default;
};

/// Dense internal indexing: buses are numbered 0..n-1 in input order, external
/// ids kept in a bidirectional map (CDF bus numbers are sparse and arbitrary).
class BusIndex {
  public:
    explicit BusIndex(const NetworkCase& net) {
        ids_.reserve(net.buses.size());
        for (const Bus& b : net.buses) {
            pos_.emplace(b.id, static_cast<int>(ids_.size()));
            ids_.push_back(b.id);
        }
    }

    int size() const { return static_cast<int>(ids_.size()); }

    /// Internal index for an external id, or -1.
    int find(int bus_id) const noexcept {
        auto it = pos_.find(bus_id);
        return it == pos_.end() ? -1 : it->second;
    }

    int at(int bus_id) const {
        int p = find(bus_id);
        if (p < 0) throw StructuralError("unknown bus id " + std::to_string(bus_id));
        return p;
    }

    int id_of(int pos) const { return ids_.at(static_cast<std::size_t>(pos)); }

  private:
    std::vector<int> ids_;
    std::unordered_map<int, int> pos_;
};

}  // namespace ciflow
