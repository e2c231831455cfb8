#include "ciflow/ybus.hpp"

#include <algorithm>
#include <map>
#include <random>

#include "ciflow/stamps.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciflow;

namespace {

/// Brute-force assembly oracle: dense complex matrix stamped directly from the
/// branch/shunt data, independent of assemble_ybus.
std::vector<std::vector<Complex>> dense_assembly(const NetworkCase& net) {
    const BusIndex index(net);
    const int n = index.size();
    std::vector<std::vector<Complex>> y(static_cast<std::size_t>(n),
                                        std::vector<Complex>(static_cast<std::size_t>(n)));
    for (const Branch& br : net.branches) {
        const auto i = static_cast<std::size_t>(index.at(br.from_bus));
        const auto j = static_cast<std::size_t>(index.at(br.to_bus));
        const Complex ys = 1.0 / Complex(br.r, br.x);
        if (br.kind == BranchKind::Line) {
            const Complex sh(0.0, br.b_charging / 2.0);
            y[i][i] += ys + sh;
            y[j][j] += ys + sh;
            y[i][j] -= ys;
            y[j][i] -= ys;
        } else {
            y[i][i] += ys / (br.tap * br.tap);
            y[j][j] += ys;
            y[i][j] -= ys / br.tap;
            y[j][i] -= ys / br.tap;
        }
    }
    for (std::size_t i = 0; i < net.buses.size(); ++i) {
        y[i][i] += Complex(net.buses[i].shunt_g, net.buses[i].shunt_b);
    }
    return y;
}

NetworkCase random_case(std::mt19937_64& rng, int n_buses) {
    NetworkCase net;
    net.name = "random";
    net.buses.push_back({1, BusKind::Slack, 1.0, 0.0, 0.0, 0.0});
    for (int i = 2; i <= n_buses; ++i) {
        net.buses.push_back({i, BusKind::Pq, 1.0, 0.0, 0.0, 0.0});
    }
    // spanning chain plus a few extra edges
    for (int i = 2; i <= n_buses; ++i) {
        const int j = 1 + static_cast<int>(rng() % static_cast<unsigned>(i - 1));
        net.branches.push_back({j, i, testutil::uniform(rng, 0.0, 0.05),
                                testutil::uniform(rng, 0.02, 0.3), 0.0, 1.0, BranchKind::Line});
    }
    for (int e = 0; e < n_buses / 2; ++e) {
        const int i = 1 + static_cast<int>(rng() % static_cast<unsigned>(n_buses));
        const int j = 1 + static_cast<int>(rng() % static_cast<unsigned>(n_buses));
        if (i == j) continue;
        net.branches.push_back({i, j, testutil::uniform(rng, 0.0, 0.05),
                                testutil::uniform(rng, 0.02, 0.3), 0.0, 1.0, BranchKind::Line});
    }
    return net;
}

}  // namespace

TEST_CASE("assemble: single line") {
    NetworkCase net = testutil::two_bus(0.0, 0.1, 0.0, 0.0);
    const YBus y = assemble_ybus(net);
    CHECK(y.at(0, 0) == Complex(0.0, -10.0));
    CHECK(y.at(1, 1) == Complex(0.0, -10.0));
    CHECK(y.at(0, 1) == Complex(0.0, 10.0));
    CHECK(y.at(1, 0) == Complex(0.0, 10.0));
}

TEST_CASE("assemble: bus shunt joins the diagonal") {
    NetworkCase net = testutil::two_bus(0.0, 0.1, 0.0, 0.0);
    net.buses[0].shunt_b = 0.05;
    const YBus y = assemble_ybus(net);
    CHECK(y.at(0, 0).imag() == doctest::Approx(-9.95).epsilon(1e-14));
}

TEST_CASE("assemble: ieee14 equals the dense brute-force oracle") {
    const NetworkCase net = testutil::load_ieee14();
    const YBus y = assemble_ybus(net);
    const auto oracle = dense_assembly(net);
    double max_err = 0.0;
    for (int r = 0; r < y.size(); ++r) {
        for (int c = 0; c < y.size(); ++c) {
            max_err = std::max(max_err,
                               std::abs(y.at(r, c) - oracle[static_cast<std::size_t>(r)]
                                                           [static_cast<std::size_t>(c)]));
        }
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("assemble: zero row sums without shunts/charging/taps") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const NetworkCase net = random_case(rng, 12);
        const YBus y = assemble_ybus(net);
        for (int r = 0; r < y.size(); ++r) {
            Complex sum = 0.0;
            for (const auto& e : y.row(r)) sum += e.y;
            CHECK(std::abs(sum) < 1e-12);
        }
    }
}

TEST_CASE("assemble: branch order does not change the matrix") {
    NetworkCase net = testutil::load_ieee14();
    const YBus a = assemble_ybus(net);
    std::mt19937_64 rng(5);
    std::shuffle(net.branches.begin(), net.branches.end(), rng);
    const YBus b = assemble_ybus(net);
    REQUIRE(a.entries().size() == b.entries().size());
    for (std::size_t k = 0; k < a.entries().size(); ++k) {
        CHECK(a.entries()[k].row == b.entries()[k].row);
        CHECK(a.entries()[k].col == b.entries()[k].col);
        CHECK(a.entries()[k].y == b.entries()[k].y);  // bitwise
    }
}

TEST_CASE("assemble: unknown branch endpoint is a structural error") {
    NetworkCase net = testutil::two_bus(0.0, 0.1, 0.0, 0.0);
    net.branches.push_back({1, 77, 0.0, 0.1, 0.0, 1.0, BranchKind::Line});
    CHECK_THROWS_WITH_AS(static_cast<void>(assemble_ybus(net)), "unknown bus id 77",
                         StructuralError);
}

TEST_CASE("real block expansion: single entry pattern") {
    NetworkCase net = testutil::two_bus(0.01, 0.1, 0.0, 0.0);
    YBus y = assemble_ybus(net);
    const SparseMatrix m = real_block_expand(y);
    // block of entry (0, 1) = -(g + jb): [[G, -B], [B, G]]
    const Complex y01 = y.at(0, 1);
    std::vector<double> probe(static_cast<std::size_t>(m.dim()), 0.0);
    probe[2] = 1.0;  // V2x
    const std::vector<double> out = m.multiply(probe);
    CHECK(out[0] == doctest::Approx(y01.real()));
    CHECK(out[1] == doctest::Approx(y01.imag()));
}

TEST_CASE("real block expansion: ring isomorphism on random matrices") {
    std::mt19937_64 rng(31);
    double max_err = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const NetworkCase net = random_case(rng, 8);
        const YBus y = assemble_ybus(net);
        const SparseMatrix m = real_block_expand(y);
        std::vector<Complex> v(static_cast<std::size_t>(y.size()));
        std::vector<double> vi(static_cast<std::size_t>(2 * y.size()));
        for (int i = 0; i < y.size(); ++i) {
            v[static_cast<std::size_t>(i)] = {testutil::uniform(rng, -1.0, 1.0),
                                              testutil::uniform(rng, -1.0, 1.0)};
            vi[static_cast<std::size_t>(2 * i)] = v[static_cast<std::size_t>(i)].real();
            vi[static_cast<std::size_t>(2 * i + 1)] = v[static_cast<std::size_t>(i)].imag();
        }
        const std::vector<Complex> yv = y.multiply(v);
        const std::vector<double> mv = m.multiply(vi);
        for (int i = 0; i < y.size(); ++i) {
            max_err = std::max(max_err, std::abs(mv[static_cast<std::size_t>(2 * i)] -
                                                 yv[static_cast<std::size_t>(i)].real()));
            max_err = std::max(max_err, std::abs(mv[static_cast<std::size_t>(2 * i + 1)] -
                                                 yv[static_cast<std::size_t>(i)].imag()));
        }
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("real block expansion: ieee118 stores exactly 4x the complex nonzeros") {
    const NetworkCase net = testutil::load_ieee118();
    const YBus y = assemble_ybus(net);
    const SparseMatrix m = real_block_expand(y);
    CHECK(m.nnz() == 4 * static_cast<int>(y.entries().size()));
}
