#include "ciflow/ybus.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <tuple>

#include "ciflow/stamps.hpp"

namespace ciflow {

YBus::YBus(int n, std::vector<Entry> sorted_entries)
    : n_(n), entries_(std::move(sorted_entries)), row_start_(n + 1, 0) {
    for (const Entry& e : entries_) ++row_start_[e.row + 1];
    for (int r = 0; r < n_; ++r) row_start_[r + 1] += row_start_[r];
}

Complex YBus::at(int r, int c) const {
    auto rowspan = row(r);
    auto it = std::lower_bound(rowspan.begin(), rowspan.end(), c,
                               [](const Entry& e, int col) { return e.col < col; });
    if (it != rowspan.end() && it->col == c) return it->y;
    return {0.0, 0.0};
}

std::vector<Complex> YBus::multiply(std::span<const Complex> v) const {
    std::vector<Complex> out(static_cast<std::size_t>(n_), Complex(0.0, 0.0));
    for (const Entry& e : entries_) {
        out[static_cast<std::size_t>(e.row)] += e.y * v[static_cast<std::size_t>(e.col)];
    }
    return out;
}

YBus assemble_ybus(const NetworkCase& net) {
    const BusIndex index(net);
    const int n = index.size();

    // Stamping order is canonicalized so that a permutation of the branch list
    // produces a bit-identical matrix (floating-point sums are order sensitive).
    std::vector<std::size_t> order(net.branches.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Branch& p = net.branches[a];
        const Branch& q = net.branches[b];
        return std::tie(p.from_bus, p.to_bus, p.r, p.x, p.b_charging, p.tap, p.kind) <
               std::tie(q.from_bus, q.to_bus, q.r, q.x, q.b_charging, q.tap, q.kind);
    });

    std::map<std::pair<int, int>, Complex> acc;
    for (std::size_t k : order) {
        const Branch& br = net.branches[k];
        const int i = index.at(br.from_bus);
        const int j = index.at(br.to_bus);
        const TerminalStamp s = br.kind == BranchKind::Line
                                    ? line_stamp(br.r, br.x, br.b_charging)
                                    : transformer_stamp(br.r, br.x, br.tap);
        acc[{i, i}] += s.y11;
        acc[{i, j}] += s.y12;
        acc[{j, i}] += s.y21;
        acc[{j, j}] += s.y22;
    }
    for (int i = 0; i < n; ++i) {
        const Bus& b = net.buses[static_cast<std::size_t>(i)];
        acc[{i, i}] += Complex(b.shunt_g, b.shunt_b);
    }

    std::vector<YBus::Entry> entries;
    entries.reserve(acc.size());
    for (const auto& [pos, y] : acc) {
        entries.push_back({pos.first, pos.second, y});
    }
    return YBus(n, std::move(entries));
}

SparseMatrix real_block_expand(const YBus& y) {
    SparseMatrix m(2 * y.size());
    for (const YBus::Entry& e : y.entries()) {
        const int r = 2 * e.row;
        const int c = 2 * e.col;
        const double g = e.y.real();
        const double b = e.y.imag();
        m.add(r, c, g);
        m.add(r, c + 1, -b);
        m.add(r + 1, c, b);
        m.add(r + 1, c + 1, g);
    }
    m.finalize();
    return m;
}

}  // namespace ciflow
