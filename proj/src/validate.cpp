#include "ciflow/validate.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace ciflow {

namespace {

bool finite(double v) { return std::isfinite(v); }

}  // namespace

std::vector<Violation> validate_case(const NetworkCase& net) {
    std::vector<Violation> out;
    auto report = [&out](ViolationKind kind, const std::string& msg) {
        out.push_back({kind, msg});
    };

    const BusIndex index(net);
    const int n = index.size();

    std::vector<int> slack_ids;
    for (const Bus& b : net.buses) {
        if (b.kind == BusKind::Slack) slack_ids.push_back(b.id);
        if ((b.kind == BusKind::Slack || b.kind == BusKind::Pv) && !(b.v_target > 0.0)) {
            report(ViolationKind::BadVoltageTarget,
                   "bus " + std::to_string(b.id) + ": voltage target must be positive");
        }
        if (!finite(b.v_target) || !finite(b.angle_init) || !finite(b.shunt_g) ||
            !finite(b.shunt_b)) {
            report(ViolationKind::NonFinite, "bus " + std::to_string(b.id) + ": non-finite field");
        }
    }
    if (slack_ids.size() != 1) {
        std::ostringstream msg;
        msg << "expected exactly one slack bus, found " << slack_ids.size();
        if (!slack_ids.empty()) {
            msg << " (buses";
            for (int id : slack_ids) msg << ' ' << id;
            msg << ')';
        }
        report(ViolationKind::SlackCount, msg.str());
    }

    for (std::size_t k = 0; k < net.branches.size(); ++k) {
        const Branch& br = net.branches[k];
        const std::string tag = "branch " + std::to_string(k) + " (" +
                                std::to_string(br.from_bus) + "-" + std::to_string(br.to_bus) + ")";
        if (index.find(br.from_bus) < 0) {
            report(ViolationKind::BadBusRef, tag + ": unknown bus id " + std::to_string(br.from_bus));
        }
        if (index.find(br.to_bus) < 0) {
            report(ViolationKind::BadBusRef, tag + ": unknown bus id " + std::to_string(br.to_bus));
        }
        if (!(br.r * br.r + br.x * br.x > 0.0)) {
            report(ViolationKind::BadImpedance, tag + ": zero series impedance");
        }
        if (!(br.tap > 0.0)) {
            report(ViolationKind::BadTap, tag + ": non-positive tap");
        }
        if (br.kind == BranchKind::Line && br.tap != 1.0) {
            report(ViolationKind::LineWithTap, tag + ": line with off-nominal tap");
        }
        if (br.kind == BranchKind::Transformer && br.b_charging != 0.0) {
            report(ViolationKind::TransformerWithCharging, tag + ": transformer with line charging");
        }
        if (!finite(br.r) || !finite(br.x) || !finite(br.b_charging) || !finite(br.tap)) {
            report(ViolationKind::NonFinite, tag + ": non-finite field");
        }
    }

    std::vector<bool> has_gen(static_cast<std::size_t>(n), false);
    for (const Generator& g : net.generators) {
        int pos = index.find(g.bus);
        if (pos < 0) {
            report(ViolationKind::BadBusRef,
                   "generator at unknown bus id " + std::to_string(g.bus));
            continue;
        }
        has_gen[static_cast<std::size_t>(pos)] = true;
        if (g.q_min > g.q_max) {
            report(ViolationKind::BadQLimits,
                   "generator at bus " + std::to_string(g.bus) + ": q_min > q_max");
        }
        if (!finite(g.p_g) || !finite(g.q_g) || !finite(g.q_min) || !finite(g.q_max)) {
            report(ViolationKind::NonFinite,
                   "generator at bus " + std::to_string(g.bus) + ": non-finite field");
        }
    }
    for (const Load& l : net.loads) {
        if (index.find(l.bus) < 0) {
            report(ViolationKind::BadBusRef, "load at unknown bus id " + std::to_string(l.bus));
        }
        if (!finite(l.p_l) || !finite(l.q_l)) {
            report(ViolationKind::NonFinite,
                   "load at bus " + std::to_string(l.bus) + ": non-finite field");
        }
    }
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses[static_cast<std::size_t>(i)];
        if (b.kind == BusKind::Pv && !has_gen[static_cast<std::size_t>(i)]) {
            report(ViolationKind::PvWithoutGenerator,
                   "bus " + std::to_string(b.id) + ": PV bus without a regulating generator");
        }
    }

    // Connectivity over the branch graph (single component).
    if (n > 0) {
        std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
        for (const Branch& br : net.branches) {
            int i = index.find(br.from_bus);
            int j = index.find(br.to_bus);
            if (i >= 0 && j >= 0) {
                adj[static_cast<std::size_t>(i)].push_back(j);
                adj[static_cast<std::size_t>(j)].push_back(i);
            }
        }
        std::vector<bool> seen(static_cast<std::size_t>(n), false);
        std::queue<int> q;
        q.push(0);
        seen[0] = true;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[static_cast<std::size_t>(u)]) {
                if (!seen[static_cast<std::size_t>(v)]) {
                    seen[static_cast<std::size_t>(v)] = true;
                    q.push(v);
                }
            }
        }
        for (int i = 0; i < n; ++i) {
            if (!seen[static_cast<std::size_t>(i)]) {
                report(ViolationKind::Disconnected,
                       "bus " + std::to_string(net.buses[static_cast<std::size_t>(i)].id) +
                           " is not connected to the main component");
            }
        }
    }

    return out;
}

}  // namespace ciflow
