#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ciflow/pmu.hpp"
#include "ciflow/solvers.hpp"
#include "ciflow/validate.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitParse = 2;
constexpr int kExitDiverged = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ciflow::ParseError("cannot read file: " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

ciflow::NetworkCase load_case(const std::string& path) {
    const std::string text = read_file(path);
    const auto dot = path.rfind('.');
    const std::string ext = dot == std::string::npos ? "" : path.substr(dot);
    ciflow::NetworkCase net = (ext == ".cdf" || ext == ".txt") ? ciflow::parse_cdf(text)
                                                               : ciflow::parse_native(text);
    const auto violations = ciflow::validate_case(net);
    if (!violations.empty()) {
        std::string msg = "case validation failed:";
        for (const auto& v : violations) msg += "\n  " + v.message;
        throw ciflow::StructuralError(msg);
    }
    return net;
}

ciflow::PmuAngleSet read_angle_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ciflow::ParseError("cannot read file: " + path);
    ciflow::PmuAngleSet out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ciflow::ParseError("expected 'bus,radians'", line_no);
        }
        try {
            out[std::stoi(line.substr(0, comma))] = std::stod(line.substr(comma + 1));
        } catch (const std::exception&) {
            if (line_no == 1) continue;  // header row
            throw ciflow::ParseError("expected 'bus,radians'", line_no);
        }
    }
    return out;
}

void write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw ciflow::Error("cannot write " + out_path);
    out << text;
}

ciflow::PmuScenario make_scenario(const std::string& name, double tve, std::uint64_t seed,
                                  const std::string& form) {
    ciflow::PmuScenario sc;
    if (name == "exact") sc.mode = ciflow::PmuMode::Exact;
    else if (name == "worst+") sc.mode = ciflow::PmuMode::WorstPositive;
    else if (name == "worst-") sc.mode = ciflow::PmuMode::WorstNegative;
    else if (name == "random") sc.mode = ciflow::PmuMode::Random;
    else if (name == "random-indep") sc.mode = ciflow::PmuMode::RandomIndependent;
    else throw UsageError("unknown --pmu-scenario '" + name + "'");
    sc.tve_fraction = tve;
    sc.seed = seed;
    if (form == "rel") sc.form = ciflow::AngleErrorForm::RelativeFraction;
    else if (form == "abs") sc.form = ciflow::AngleErrorForm::AbsoluteRadians;
    else throw UsageError("unknown --tve-form '" + form + "'");
    return sc;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9e", v);
    return buf;
}

int cmd_solve(const std::string& case_path, const std::string& method_name, double tol,
              int max_iter, bool q_limits, const std::string& scenario_name, double tve,
              std::uint64_t seed, const std::string& tve_form, const std::string& angles_path,
              const std::string& out_path, const std::string& format) {
    const auto method = ciflow::method_from_name(method_name);
    if (!method) throw UsageError("unknown --method '" + method_name + "'");

    ciflow::SolverOptions opts;
    opts.method = *method;
    opts.tolerance = tol;
    opts.max_iterations = max_iter;
    opts.enforce_q_limits = q_limits;

    const ciflow::NetworkCase net = load_case(case_path);

    ciflow::PmuAngleSet angles;
    const ciflow::PmuAngleSet* angles_ptr = nullptr;
    if (*method == ciflow::Method::CiPmu) {
        if (!angles_path.empty()) {
            angles = read_angle_csv(angles_path);
        } else if (!scenario_name.empty()) {
            ciflow::SolverOptions oracle_opts = opts;
            oracle_opts.method = ciflow::Method::ConventionalNr;
            const ciflow::SolutionReport oracle = ciflow::solve(net, oracle_opts);
            if (!oracle.converged) {
                std::cerr << "oracle solve failed: " << oracle.failure << "\n";
                return kExitDiverged;
            }
            ciflow::PmuAngleSet true_angles;
            for (const ciflow::Bus& b : net.buses) {
                if (b.kind != ciflow::BusKind::Pv) continue;
                for (const ciflow::BusRecord& r : oracle.buses) {
                    if (r.id == b.id) true_angles[b.id] = r.va;
                }
            }
            angles = ciflow::simulate_pmu(true_angles,
                                          make_scenario(scenario_name, tve, seed, tve_form));
        } else {
            throw UsageError("ci-pmu needs --pmu-angles or --pmu-scenario");
        }
        angles_ptr = &angles;
    }

    const ciflow::SolutionReport rep = ciflow::solve(net, opts, angles_ptr);
    write_output(ciflow::write_solution(rep, format == "csv" ? ciflow::ReportFormat::Csv
                                                             : ciflow::ReportFormat::Json),
                 out_path);
    if (!rep.converged) {
        std::cerr << "solver did not converge: " << rep.failure << "\n";
        return kExitDiverged;
    }
    return kExitOk;
}

int cmd_compare(const std::string& case_path, double tol, int max_iter, double tve, int seeds,
                std::uint64_t seed_base, const std::string& tve_form, const std::string& out_prefix,
                const std::string& format) {
    const ciflow::NetworkCase net = load_case(case_path);
    ciflow::SolverOptions opts;
    opts.tolerance = tol;
    opts.max_iterations = max_iter;

    const ciflow::AngleErrorForm form = make_scenario("exact", tve, 0, tve_form).form;
    std::vector<ciflow::PmuScenario> fixed = {{ciflow::PmuMode::Exact, tve, 0, form},
                                              {ciflow::PmuMode::WorstPositive, tve, 0, form},
                                              {ciflow::PmuMode::WorstNegative, tve, 0, form}};
    auto rows = ciflow::run_accuracy_experiment(net, fixed, opts);

    std::vector<ciflow::PmuScenario> random;
    random.reserve(static_cast<std::size_t>(seeds));
    for (int s = 0; s < seeds; ++s) {
        random.push_back({ciflow::PmuMode::Random, tve, seed_base + static_cast<std::uint64_t>(s),
                          form});
    }
    const auto random_rows = ciflow::run_accuracy_experiment(net, random, opts);
    bool random_ok = !random_rows.empty();
    for (const auto& r : random_rows) random_ok = random_ok && r.ok;
    ciflow::ScenarioRow random_agg;
    random_agg.system = net.name;
    random_agg.scenario = "random(mean of " + std::to_string(seeds) + " seeds)";
    random_agg.ok = random_ok;
    if (random_ok) random_agg.metrics = ciflow::mean_metrics(random_rows);
    rows.push_back(random_agg);

    std::ostringstream table;
    if (format == "json") {
        table << "[\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            table << "  {\"system\": \"" << r.system << "\", \"scenario\": \"" << r.scenario
                  << "\", \"ok\": " << (r.ok ? "true" : "false");
            if (r.ok) {
                table << ", \"max_abs_vm\": " << fmt(r.metrics.max_abs_vm)
                      << ", \"max_abs_va\": " << fmt(r.metrics.max_abs_va)
                      << ", \"mean_abs_vm\": " << fmt(r.metrics.mean_abs_vm)
                      << ", \"mean_abs_va\": " << fmt(r.metrics.mean_abs_va);
            } else {
                table << ", \"error\": \"" << r.error << "\"";
            }
            table << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
        }
        table << "]\n";
    } else {
        table << "system,scenario,max_abs_vm,max_abs_va,mean_abs_vm,mean_abs_va,error\n";
        for (const auto& r : rows) {
            table << r.system << ',' << r.scenario << ',';
            if (r.ok) {
                table << fmt(r.metrics.max_abs_vm) << ',' << fmt(r.metrics.max_abs_va) << ','
                      << fmt(r.metrics.mean_abs_vm) << ',' << fmt(r.metrics.mean_abs_va) << ',';
            } else {
                table << ",,,," << r.error;
            }
            table << "\n";
        }
    }
    write_output(table.str(), out_prefix.empty() ? "" : out_prefix + ".table." +
                                                            (format == "json" ? "json" : "csv"));

    if (!out_prefix.empty()) {
        for (const auto& r : rows) {
            if (!r.ok) continue;
            std::string tag = r.scenario.substr(0, r.scenario.find('('));
            std::replace(tag.begin(), tag.end(), '+', 'p');
            std::replace(tag.begin(), tag.end(), '-', 'm');
            ciflow::emit_plot_data(r.metrics, out_prefix + "." + tag);
        }
    }
    for (const auto& r : rows) {
        if (!r.ok) return kExitDiverged;
    }
    return kExitOk;
}

int cmd_bench(const std::string& case_path, int reps, double tol, int max_iter) {
    const ciflow::NetworkCase net = load_case(case_path);
    ciflow::SolverOptions opts;
    opts.tolerance = tol;
    opts.max_iterations = max_iter;

    const ciflow::SolutionReport oracle = ciflow::solve_conventional_nr(net, opts);
    if (!oracle.converged) {
        std::cerr << "oracle solve failed: " << oracle.failure << "\n";
        return kExitDiverged;
    }
    ciflow::PmuAngleSet angles;
    for (const ciflow::Bus& b : net.buses) {
        if (b.kind != ciflow::BusKind::Pv) continue;
        for (const ciflow::BusRecord& r : oracle.buses) {
            if (r.id == b.id) angles[b.id] = r.va;
        }
    }

    struct Row {
        std::string method;
        double median_ms = 0.0;
        int iterations = 0;
        int factorizations = 0;
        bool ok = true;
    };
    std::vector<Row> table;
    const std::vector<ciflow::Method> methods = {
        ciflow::Method::ConventionalNr, ciflow::Method::CiNewton, ciflow::Method::CiLinear,
        ciflow::Method::CiPmu};
    for (const ciflow::Method m : methods) {
        ciflow::SolverOptions o = opts;
        o.method = m;
        std::vector<double> times;
        Row row;
        row.method = ciflow::method_name(m);
        const int warmup = 3;
        for (int r = 0; r < reps + warmup; ++r) {
            const ciflow::SolutionReport rep =
                ciflow::solve(net, o, m == ciflow::Method::CiPmu ? &angles : nullptr);
            if (!rep.converged) {
                row.ok = false;
                break;
            }
            if (r >= warmup) times.push_back(rep.wall_ms);
            row.iterations = rep.iterations;
            row.factorizations = rep.factorizations;
        }
        if (row.ok && !times.empty()) {
            std::sort(times.begin(), times.end());
            row.median_ms = times[times.size() / 2];
        }
        table.push_back(row);
    }

    std::printf("# case=%s reps=%d tol=%g\n", net.name.c_str(), reps, tol);
    std::printf("%-16s %12s %11s %15s\n", "method", "median_ms", "iterations", "factorizations");
    for (const Row& r : table) {
        if (r.ok) {
            std::printf("%-16s %12.4f %11d %15d\n", r.method.c_str(), r.median_ms, r.iterations,
                        r.factorizations);
        } else {
            std::printf("%-16s %12s %11s %15s\n", r.method.c_str(), "failed", "-", "-");
        }
    }
    if (table[0].ok && table[3].ok && table[0].median_ms > 0.0) {
        std::printf("# time ratio ci-pmu/conventional-nr = %.3f\n",
                    table[3].median_ms / table[0].median_ms);
    }
    if (table[1].ok && table[3].ok && table[1].median_ms > 0.0) {
        std::printf("# time ratio ci-pmu/ci-newton = %.3f\n",
                    table[3].median_ms / table[1].median_ms);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Current-injection power flow with PMU-pinned PV buses"};
    app.require_subcommand(1);

    std::string case_path, method = "ci-newton", scenario, angles_path, out_path;
    std::string format = "json", tve_form = "rel";
    double tol = 1e-8, tve = 0.01;
    int max_iter = 50, seeds = 100, reps = 20;
    std::uint64_t seed = 0;
    bool q_limits = false;

    CLI::App* solve = app.add_subcommand("solve", "Solve one case with one method");
    solve->add_option("--case", case_path, "case file (.cdf/.txt or native json)")->required();
    solve->add_option("--method", method, "conventional-nr | ci-newton | ci-linear | ci-pmu");
    solve->add_option("--tol", tol, "convergence tolerance");
    solve->add_option("--max-iter", max_iter, "iteration budget");
    solve->add_flag("--q-limits", q_limits, "enforce generator reactive limits");
    solve->add_option("--pmu-scenario", scenario, "exact | worst+ | worst- | random | random-indep");
    solve->add_option("--tve", tve, "TVE fraction for simulated measurements");
    solve->add_option("--seed", seed, "random scenario seed");
    solve->add_option("--tve-form", tve_form, "rel (scale angle) | abs (shift radians)");
    solve->add_option("--pmu-angles", angles_path, "csv of bus,radians measurements");
    solve->add_option("--out", out_path, "output path (default stdout)");
    solve->add_option("--format", format, "json | csv");

    CLI::App* compare = app.add_subcommand("compare", "PMU scenario accuracy table");
    compare->add_option("--case", case_path, "case file")->required();
    compare->add_option("--tol", tol, "convergence tolerance");
    compare->add_option("--max-iter", max_iter, "iteration budget");
    compare->add_option("--tve", tve, "TVE fraction");
    compare->add_option("--seeds", seeds, "random seed count");
    compare->add_option("--seed", seed, "base seed");
    compare->add_option("--tve-form", tve_form, "rel | abs");
    compare->add_option("--out", out_path, "output prefix for table and per-bus error files");
    compare->add_option("--format", format, "json | csv");

    CLI::App* bench = app.add_subcommand("bench", "Method timing and factorization counts");
    bench->add_option("--case", case_path, "case file")->required();
    bench->add_option("--reps", reps, "timed repetitions per method");
    bench->add_option("--tol", tol, "convergence tolerance");
    bench->add_option("--max-iter", max_iter, "iteration budget");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (solve->parsed()) {
            return cmd_solve(case_path, method, tol, max_iter, q_limits, scenario, tve, seed,
                             tve_form, angles_path, out_path, format);
        }
        if (compare->parsed()) {
            return cmd_compare(case_path, tol, max_iter, tve, seeds, seed, tve_form, out_path,
                               format);
        }
        if (bench->parsed()) {
            return cmd_bench(case_path, reps, tol, max_iter);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ciflow::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ciflow::StructuralError& e) {
        std::cerr << "case error: " << e.what() << "\n";
        return kExitParse;
    } catch (const ciflow::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    }
    return kExitUsage;
}
