#include "ciflow/caseio.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "json.hpp"

namespace ciflow {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

/// Fixed-range field, 1-indexed inclusive columns per the 1973 format sheet.
std::string field(const std::string& line, int first, int last) {
    if (first > static_cast<int>(line.size())) return "";
    const auto start = static_cast<std::size_t>(first - 1);
    const auto len = std::min(static_cast<std::size_t>(last - first + 1), line.size() - start);
    return trim(line.substr(start, len));
}

double num_field(const std::string& line, int first, int last, int line_no) {
    const std::string s = field(line, first, last);
    if (s.empty()) return 0.0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == nullptr || *end != '\0') {
        throw ParseError("malformed numeric field '" + s + "' in columns " +
                             std::to_string(first) + "-" + std::to_string(last),
                         line_no);
    }
    return v;
}

int int_field(const std::string& line, int first, int last, int line_no) {
    const double v = num_field(line, first, last, line_no);
    return static_cast<int>(v);
}

bool is_terminator(const std::string& line) {
    const std::string t = trim(line);
    return t.rfind("-999", 0) == 0 || t.rfind("-99", 0) == 0;
}

}  // namespace

NetworkCase parse_cdf(const std::string& text) {
    std::vector<std::string> lines;
    {
        std::istringstream in(text);
        std::string l;
        while (std::getline(in, l)) lines.push_back(l);
    }
    if (lines.empty()) throw ParseError("empty document");

    NetworkCase net;
    net.base_mva = num_field(lines[0], 32, 37, 1);
    if (net.base_mva <= 0.0) net.base_mva = 100.0;
    net.name = field(lines[0], 46, 73);

    std::size_t i = 1;
    auto find_section = [&](const char* tag) {
        while (i < lines.size()) {
            if (trim(lines[i]).rfind(tag, 0) == 0) {
                ++i;
                return;
            }
            ++i;
        }
        throw ParseError(std::string("missing section header '") + tag + "'");
    };

    find_section("BUS DATA FOLLOWS");
    bool terminated = false;
    for (; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        if (is_terminator(l)) {
            terminated = true;
            ++i;
            break;
        }
        if (trim(l).empty()) continue;
        const int line_no = static_cast<int>(i) + 1;
        Bus b;
        b.id = int_field(l, 1, 4, line_no);
        const int type = int_field(l, 25, 26, line_no);
        switch (type) {
            case 3: b.kind = BusKind::Slack; break;
            case 2: b.kind = BusKind::Pv; break;
            case 1:  // hold MVAR within voltage limits: only slack/PV/PQ exist here
            case 0: b.kind = BusKind::Pq; break;
            default:
                throw ParseError("unknown bus type code " + std::to_string(type), line_no);
        }
        const double final_v = num_field(l, 28, 33, line_no);
        const double final_a_deg = num_field(l, 34, 40, line_no);
        const double load_mw = num_field(l, 41, 49, line_no);
        const double load_mvar = num_field(l, 50, 59, line_no);
        const double gen_mw = num_field(l, 60, 67, line_no);
        const double gen_mvar = num_field(l, 68, 75, line_no);
        const double desired_v = num_field(l, 85, 90, line_no);
        const double q_max = num_field(l, 91, 98, line_no);
        const double q_min = num_field(l, 99, 106, line_no);
        b.shunt_g = num_field(l, 107, 114, line_no);
        b.shunt_b = num_field(l, 115, 122, line_no);
        b.angle_init = final_a_deg * std::numbers::pi / 180.0;
        b.v_target = desired_v > 0.0 ? desired_v : (final_v > 0.0 ? final_v : 1.0);
        net.buses.push_back(b);

        if (load_mw != 0.0 || load_mvar != 0.0) {
            net.loads.push_back({b.id, load_mw / net.base_mva, load_mvar / net.base_mva});
        }
        if (b.kind != BusKind::Pq || gen_mw != 0.0 || gen_mvar != 0.0) {
            Generator g;
            g.bus = b.id;
            g.p_g = gen_mw / net.base_mva;
            g.q_g = gen_mvar / net.base_mva;
            g.q_max = q_max / net.base_mva;
            g.q_min = q_min / net.base_mva;
            if (g.q_max == 0.0 && g.q_min == 0.0) {
                // unstated limits: treat as unlimited
                g.q_max = 1e9;
                g.q_min = -1e9;
            }
            net.generators.push_back(g);
        }
    }
    if (!terminated) throw ParseError("bus section not terminated by -999");

    BusIndex index(net);

    find_section("BRANCH DATA FOLLOWS");
    terminated = false;
    for (; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        if (is_terminator(l)) {
            terminated = true;
            ++i;
            break;
        }
        if (trim(l).empty()) continue;
        const int line_no = static_cast<int>(i) + 1;
        Branch br;
        br.from_bus = int_field(l, 1, 4, line_no);
        br.to_bus = int_field(l, 6, 9, line_no);
        const int type = int_field(l, 19, 19, line_no);
        br.r = num_field(l, 20, 29, line_no);
        br.x = num_field(l, 30, 40, line_no);
        br.b_charging = num_field(l, 41, 50, line_no);
        const double ratio = num_field(l, 77, 82, line_no);
        if (type == 0) {
            br.kind = BranchKind::Line;
            br.tap = 1.0;
        } else {
            br.kind = BranchKind::Transformer;
            br.tap = ratio == 0.0 ? 1.0 : ratio;
        }
        if (index.find(br.from_bus) < 0) {
            throw ParseError("branch references unknown bus " + std::to_string(br.from_bus),
                             line_no);
        }
        if (index.find(br.to_bus) < 0) {
            throw ParseError("branch references unknown bus " + std::to_string(br.to_bus), line_no);
        }
        net.branches.push_back(br);
    }
    if (!terminated) throw ParseError("branch section not terminated by -999");

    return net;
}

namespace {

const char* kind_name(BusKind k) {
    switch (k) {
        case BusKind::Slack: return "slack";
        case BusKind::Pv: return "pv";
        case BusKind::Pq: return "pq";
    }
    return "pq";
}

BusKind kind_from(const std::string& s, const std::string& where) {
    if (s == "slack") return BusKind::Slack;
    if (s == "pv") return BusKind::Pv;
    if (s == "pq") return BusKind::Pq;
    throw ParseError(where + ": unknown bus kind '" + s + "'");
}

double num_at(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ParseError(where + "." + key + ": missing or non-numeric");
    }
    return j.at(key).get<double>();
}

int int_at(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key) || !j.at(key).is_number_integer()) {
        throw ParseError(where + "." + key + ": missing or non-integer");
    }
    return j.at(key).get<int>();
}

}  // namespace

NetworkCase parse_native(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("$: expected an object");

    NetworkCase net;
    net.name = doc.value("name", std::string{});
    net.base_mva = doc.contains("base_mva") ? num_at(doc, "base_mva", "$") : 100.0;

    auto array_at = [&doc](const char* key) -> const json& {
        static const json empty = json::array();
        if (!doc.contains(key)) return empty;
        if (!doc.at(key).is_array()) throw ParseError(std::string("$.") + key + ": expected array");
        return doc.at(key);
    };

    int k = 0;
    for (const json& jb : array_at("buses")) {
        const std::string where = "$.buses[" + std::to_string(k++) + "]";
        Bus b;
        b.id = int_at(jb, "id", where);
        b.kind = kind_from(jb.value("kind", "pq"), where);
        b.v_target = jb.contains("v_target") ? num_at(jb, "v_target", where) : 1.0;
        b.angle_init = jb.contains("angle_init") ? num_at(jb, "angle_init", where) : 0.0;
        b.shunt_g = jb.contains("shunt_g") ? num_at(jb, "shunt_g", where) : 0.0;
        b.shunt_b = jb.contains("shunt_b") ? num_at(jb, "shunt_b", where) : 0.0;
        net.buses.push_back(b);
    }
    BusIndex index(net);
    auto check_bus = [&index](int id, const std::string& where) {
        if (index.find(id) < 0) {
            throw ParseError(where + ": references absent bus id " + std::to_string(id));
        }
    };

    k = 0;
    for (const json& jb : array_at("branches")) {
        const std::string where = "$.branches[" + std::to_string(k++) + "]";
        Branch br;
        br.from_bus = int_at(jb, "from_bus", where);
        br.to_bus = int_at(jb, "to_bus", where);
        check_bus(br.from_bus, where);
        check_bus(br.to_bus, where);
        br.r = num_at(jb, "r", where);
        br.x = num_at(jb, "x", where);
        br.b_charging = jb.contains("b_charging") ? num_at(jb, "b_charging", where) : 0.0;
        br.tap = jb.contains("tap") ? num_at(jb, "tap", where) : 1.0;
        const std::string kind = jb.value("kind", "line");
        if (kind == "line") {
            br.kind = BranchKind::Line;
        } else if (kind == "transformer") {
            br.kind = BranchKind::Transformer;
        } else {
            throw ParseError(where + ": unknown branch kind '" + kind + "'");
        }
        net.branches.push_back(br);
    }
    k = 0;
    for (const json& jg : array_at("generators")) {
        const std::string where = "$.generators[" + std::to_string(k++) + "]";
        Generator g;
        g.bus = int_at(jg, "bus", where);
        check_bus(g.bus, where);
        g.p_g = jg.contains("p_g") ? num_at(jg, "p_g", where) : 0.0;
        g.q_g = jg.contains("q_g") ? num_at(jg, "q_g", where) : 0.0;
        g.q_min = jg.contains("q_min") ? num_at(jg, "q_min", where) : -1e9;
        g.q_max = jg.contains("q_max") ? num_at(jg, "q_max", where) : 1e9;
        net.generators.push_back(g);
    }
    k = 0;
    for (const json& jl : array_at("loads")) {
        const std::string where = "$.loads[" + std::to_string(k++) + "]";
        Load l;
        l.bus = int_at(jl, "bus", where);
        check_bus(l.bus, where);
        l.p_l = jl.contains("p_l") ? num_at(jl, "p_l", where) : 0.0;
        l.q_l = jl.contains("q_l") ? num_at(jl, "q_l", where) : 0.0;
        net.loads.push_back(l);
    }
    return net;
}

std::string serialize_case(const NetworkCase& net) {
    json doc;
    doc["name"] = net.name;
    doc["base_mva"] = net.base_mva;
    doc["buses"] = json::array();
    for (const Bus& b : net.buses) {
        doc["buses"].push_back({{"id", b.id},
                                {"kind", kind_name(b.kind)},
                                {"v_target", b.v_target},
                                {"angle_init", b.angle_init},
                                {"shunt_g", b.shunt_g},
                                {"shunt_b", b.shunt_b}});
    }
    doc["branches"] = json::array();
    for (const Branch& br : net.branches) {
        doc["branches"].push_back(
            {{"from_bus", br.from_bus},
             {"to_bus", br.to_bus},
             {"r", br.r},
             {"x", br.x},
             {"b_charging", br.b_charging},
             {"tap", br.tap},
             {"kind", br.kind == BranchKind::Line ? "line" : "transformer"}});
    }
    doc["generators"] = json::array();
    for (const Generator& g : net.generators) {
        doc["generators"].push_back({{"bus", g.bus},
                                     {"p_g", g.p_g},
                                     {"q_g", g.q_g},
                                     {"q_min", g.q_min},
                                     {"q_max", g.q_max}});
    }
    doc["loads"] = json::array();
    for (const Load& l : net.loads) {
        doc["loads"].push_back({{"bus", l.bus}, {"p_l", l.p_l}, {"q_l", l.q_l}});
    }
    return doc.dump(2);
}

namespace {

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string write_solution(const SolutionReport& report, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json doc;
        doc["method"] = report.method;
        doc["case"] = report.case_name;
        doc["converged"] = report.converged;
        doc["iterations"] = report.iterations;
        doc["factorizations"] = report.factorizations;
        doc["max_mismatch"] = report.max_mismatch;
        doc["tolerance"] = report.tolerance;
        doc["wall_ms"] = report.wall_ms;
        doc["trace"] = report.trace;
        if (!report.failure.empty()) doc["failure"] = report.failure;
        doc["buses"] = json::array();
        for (const BusRecord& b : report.buses) {
            doc["buses"].push_back({{"bus", b.id},
                                    {"vm_pu", b.vm},
                                    {"va_rad", b.va},
                                    {"p_pu", b.p_inj},
                                    {"q_pu", b.q_inj}});
        }
        doc["generators"] = json::array();
        for (const GenRecord& g : report.generators) {
            doc["generators"].push_back({{"bus", g.bus}, {"p_g", g.p_g}, {"q_g", g.q_g}});
        }
        doc["q_limit_events"] = json::array();
        for (const QLimitEvent& e : report.q_events) {
            doc["q_limit_events"].push_back(
                {{"bus", e.bus}, {"clamped_q", e.clamped_q}, {"at_max", e.at_max}});
        }
        return doc.dump(2) + "\n";
    }

    std::ostringstream out;
    out << "# method=" << report.method << "\n";
    out << "# case=" << report.case_name << "\n";
    out << "# converged=" << (report.converged ? "true" : "false") << "\n";
    out << "# iterations=" << report.iterations << "\n";
    out << "# factorizations=" << report.factorizations << "\n";
    out << "# max_mismatch=" << fmt12(report.max_mismatch) << "\n";
    out << "# tolerance=" << fmt12(report.tolerance) << "\n";
    out << "# wall_ms=" << fmt12(report.wall_ms) << "\n";
    if (!report.failure.empty()) out << "# failure=" << report.failure << "\n";
    out << "bus,vm_pu,va_rad,p_pu,q_pu\n";
    for (const BusRecord& b : report.buses) {
        out << b.id << ',' << fmt12(b.vm) << ',' << fmt12(b.va) << ',' << fmt12(b.p_inj) << ','
            << fmt12(b.q_inj) << "\n";
    }
    return out.str();
}

}  // namespace ciflow
