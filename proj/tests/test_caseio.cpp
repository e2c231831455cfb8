#include "ciflow/caseio.hpp"

#include <random>
#include <sstream>

#include "ciflow/validate.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace ciflow;

TEST_CASE("cdf: ieee14 structure") {
    const NetworkCase net = testutil::load_ieee14();
    CHECK(net.buses.size() == 14);
    CHECK(net.branches.size() == 20);
    REQUIRE(net.generators.size() == 5);
    std::vector<int> gen_buses;
    for (const Generator& g : net.generators) gen_buses.push_back(g.bus);
    CHECK(gen_buses == std::vector<int>{1, 2, 3, 6, 8});
    int slack_id = -1;
    for (const Bus& b : net.buses) {
        if (b.kind == BusKind::Slack) slack_id = b.id;
    }
    CHECK(slack_id == 1);
    CHECK(net.base_mva == doctest::Approx(100.0));
    CHECK(validate_case(net).empty());

    // three fixed-tap transformers with the classic ratios
    int n_xfmr = 0;
    for (const Branch& br : net.branches) {
        if (br.kind == BranchKind::Transformer) ++n_xfmr;
    }
    CHECK(n_xfmr == 3);
}

TEST_CASE("cdf: ieee118 structure") {
    const NetworkCase net = testutil::load_ieee118();
    CHECK(net.buses.size() == 118);
    CHECK(net.branches.size() == 186);
    CHECK(net.generators.size() == 54);
    int slack_id = -1;
    for (const Bus& b : net.buses) {
        if (b.kind == BusKind::Slack) slack_id = b.id;
    }
    CHECK(slack_id == 69);
    CHECK(validate_case(net).empty());
}

TEST_CASE("cdf: per-unit audit of the ieee14 load column") {
    // independent pass over the fixture text: slice the load MW column directly
    const std::string text = testutil::read_file(testutil::data_path("ieee14.cdf"));
    std::istringstream in(text);
    std::string line;
    bool in_bus = false;
    double mw_total = 0.0;
    while (std::getline(in, line)) {
        if (line.rfind("BUS DATA", 0) == 0) {
            in_bus = true;
            continue;
        }
        if (in_bus && line.rfind("-999", 0) == 0) break;
        if (in_bus && line.size() > 49) {
            mw_total += std::stod(line.substr(40, 9));
        }
    }
    const NetworkCase net = testutil::load_ieee14();
    double parsed_total = 0.0;
    for (const Load& l : net.loads) parsed_total += l.p_l;
    CHECK(parsed_total == doctest::Approx(mw_total / net.base_mva).epsilon(1e-9));
}

TEST_CASE("cdf: parsing twice is idempotent") {
    const std::string text = testutil::read_file(testutil::data_path("ieee14.cdf"));
    CHECK(parse_cdf(text) == parse_cdf(text));
}

TEST_CASE("cdf: truncated bus section reports the section") {
    const std::string text =
        " 01/01/90 TEST               100.0 1990 W TRUNCATED\n"
        "BUS DATA FOLLOWS\n"
        "   1 Bus 1         1  1  3 1.060   0.00      0.00      0.00    0.00    0.00     0.0 "
        "1.0600    0.00    0.00  0.0000  0.0000    0\n";
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_cdf(text)),
                         "bus section not terminated by -999", ParseError);
}

TEST_CASE("cdf: malformed numeric field carries the line number") {
    const std::string text =
        " 01/01/90 TEST               100.0 1990 W BAD\n"
        "BUS DATA FOLLOWS\n"
        "   1 Bus 1         1  1  3 1.0p0   0.00      0.00      0.00    0.00    0.00     0.0 "
        "1.0600    0.00    0.00  0.0000  0.0000    0\n"
        "-999\n"
        "BRANCH DATA FOLLOWS\n"
        "-999\n";
    try {
        (void)parse_cdf(text);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
}

TEST_CASE("native json: round-trip is identity on the ieee cases") {
    for (const NetworkCase& net : {testutil::load_ieee14(), testutil::load_ieee118()}) {
        const NetworkCase back = parse_native(serialize_case(net));
        CHECK(back == net);
    }
}

TEST_CASE("native json: round-trip on randomized small cases") {
    std::mt19937_64 rng(53);
    for (int t = 0; t < 30; ++t) {
        NetworkCase net;
        net.name = "rand-" + std::to_string(t);
        net.base_mva = 100.0;
        const int n = 2 + static_cast<int>(rng() % 6);
        for (int i = 1; i <= n; ++i) {
            Bus b;
            b.id = i * 3;  // sparse external ids
            b.kind = i == 1 ? BusKind::Slack : (rng() % 3 == 0 ? BusKind::Pv : BusKind::Pq);
            b.v_target = testutil::uniform(rng, 0.95, 1.08);
            b.angle_init = testutil::uniform(rng, -0.3, 0.3);
            b.shunt_b = testutil::uniform(rng, -0.2, 0.2);
            net.buses.push_back(b);
            if (b.kind != BusKind::Pq) {
                net.generators.push_back({b.id, testutil::uniform(rng, 0.0, 1.0), 0.0,
                                          -testutil::uniform(rng, 0.0, 1.0),
                                          testutil::uniform(rng, 0.0, 1.0)});
            }
            if (rng() % 2 == 0) {
                net.loads.push_back({b.id, testutil::uniform(rng, 0.0, 0.5),
                                     testutil::uniform(rng, -0.2, 0.2)});
            }
        }
        for (int i = 2; i <= n; ++i) {
            net.branches.push_back({(1 + static_cast<int>(rng() % static_cast<unsigned>(i - 1))) * 3,
                                    i * 3, testutil::uniform(rng, 0.001, 0.05),
                                    testutil::uniform(rng, 0.01, 0.3), 0.0, 1.0,
                                    BranchKind::Line});
        }
        CHECK(parse_native(serialize_case(net)) == net);
    }
}

TEST_CASE("native json: minimal two-bus document") {
    const std::string doc = R"({
      "name": "mini",
      "base_mva": 100.0,
      "buses": [
        {"id": 1, "kind": "slack", "v_target": 1.0},
        {"id": 2, "kind": "pq"}
      ],
      "branches": [{"from_bus": 1, "to_bus": 2, "r": 0.0, "x": 0.1}],
      "loads": [{"bus": 2, "p_l": 0.5, "q_l": 0.1}]
    })";
    const NetworkCase net = parse_native(doc);
    CHECK(net.buses.size() == 2);
    CHECK(validate_case(net).empty());
}

TEST_CASE("native json: generator referencing an absent bus names the id") {
    const std::string doc = R"({
      "buses": [{"id": 1, "kind": "slack"}],
      "generators": [{"bus": 9, "p_g": 1.0}]
    })";
    CHECK_THROWS_WITH_AS(static_cast<void>(parse_native(doc)),
                         "$.generators[0]: references absent bus id 9", ParseError);
}

TEST_CASE("write_solution: deterministic and cross-format consistent") {
    SolutionReport rep;
    rep.method = "ci-newton";
    rep.case_name = "mini";
    rep.converged = true;
    rep.iterations = 3;
    rep.factorizations = 3;
    rep.max_mismatch = 4.2e-11;
    rep.tolerance = 1e-8;
    rep.trace = {0.1, 1e-4, 4.2e-11};
    rep.buses = {{1, 1.0, 0.0, 0.55123456789012, -0.0321}, {2, 0.98123456, -0.0512, -0.5, -0.1}};
    rep.generators = {{1, 0.55123456789012, -0.0321}};

    const std::string csv1 = write_solution(rep, ReportFormat::Csv);
    const std::string csv2 = write_solution(rep, ReportFormat::Csv);
    CHECK(csv1 == csv2);
    const std::string json1 = write_solution(rep, ReportFormat::Json);
    CHECK(json1 == write_solution(rep, ReportFormat::Json));

    // csv has one row per bus plus metadata and header
    std::istringstream in(csv1);
    std::string line;
    int rows = 0, meta = 0;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) ++meta;
        else if (line.rfind("bus,", 0) != 0) ++rows;
    }
    CHECK(rows == 2);
    CHECK(meta >= 6);

    // values agree across formats to 12 significant digits
    CHECK(csv1.find("0.551234567890") != std::string::npos);
    CHECK(json1.find("0.55123456789012") != std::string::npos);
}

TEST_CASE("validate: duplicate slack names both buses") {
    NetworkCase net = testutil::two_bus(0.0, 0.1, 0.1, 0.0);
    net.buses[1].kind = BusKind::Slack;
    const auto violations = validate_case(net);
    REQUIRE(!violations.empty());
    bool found = false;
    for (const Violation& v : violations) {
        if (v.kind == ViolationKind::SlackCount) {
            CHECK(v.message.find("1") != std::string::npos);
            CHECK(v.message.find("2") != std::string::npos);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("validate: isolated bus is a connectivity violation") {
    NetworkCase net = testutil::two_bus(0.0, 0.1, 0.1, 0.0);
    net.buses.push_back({99, BusKind::Pq, 1.0, 0.0, 0.0, 0.0});
    const auto violations = validate_case(net);
    bool found = false;
    for (const Violation& v : violations) {
        if (v.kind == ViolationKind::Disconnected) {
            CHECK(v.message.find("99") != std::string::npos);
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("validate: ieee fixtures are clean") {
    CHECK(validate_case(testutil::load_ieee14()).empty());
    CHECK(validate_case(testutil::load_ieee118()).empty());
}
