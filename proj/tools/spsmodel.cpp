// Command-line front end: closed-form model evaluation, single-scenario
// simulation, parameter sweeps, and analytic-vs-simulation gap reports.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sps/analytic.hpp"
#include "sps/compare.hpp"
#include "sps/config.hpp"
#include "sps/csv.hpp"
#include "sps/sim.hpp"
#include "sps/sweep.hpp"
#include "sps/text.hpp"

namespace {

using namespace sps;

struct AnalyzeArgs {
    int n_vehicles = 100;
    int n_blocks = 200;
    int sps_periods = 10;
    double resel_prob = 0.2;
    double period_ms = 100.0;
    std::optional<double> density_per_km;
    double range_m = 500.0;
};

int run_analyze(const AnalyzeArgs& a) {
    ModelParams mp;
    mp.n_vehicles = a.n_vehicles;
    mp.n_blocks = a.n_blocks;
    mp.sps_periods = a.sps_periods;
    mp.resel_prob = a.resel_prob;
    mp.period_ms = a.period_ms;

    if (a.density_per_km) {
        // hidden-terminal mode: the in-range population sets the local fixed point
        const HiddenTerminalParams ht{*a.density_per_km, a.range_m};
        mp.n_vehicles = local_vehicle_count(ht);
        const FixedPointSolution fp = solve_fixed_point(mp);
        const HiddenTerminalSolution sol = solve_hidden_terminal(mp, ht);
        std::cout << "n_vehicles,n_blocks,sps_periods,resel_prob,period_ms,"
                     "density_per_km,range_m,p_c,n_idle,p_single,p_c_ht,per,p_del,delay_ms\n";
        std::cout << mp.n_vehicles << ',' << mp.n_blocks << ',' << mp.sps_periods << ','
                  << format_double(mp.resel_prob) << ',' << format_double(mp.period_ms) << ','
                  << format_double(*a.density_per_km) << ',' << format_double(a.range_m) << ','
                  << format_double(fp.p_c) << ',' << format_double(fp.n_idle) << ','
                  << format_double(sol.p_single) << ',' << format_double(sol.p_c_ht) << ','
                  << format_double(sol.per) << ',' << format_double(sol.p_del) << ','
                  << format_double(sol.e_d_total_ms) << '\n';
        return 0;
    }

    const FixedPointSolution fp = solve_fixed_point(mp);
    const DelayStats d = expected_delay(mp, fp.p_c);
    std::cout << "n_vehicles,n_blocks,sps_periods,resel_prob,period_ms,"
                 "p_c,n_idle,iterations,residual,p_c_com,delay_ms\n";
    std::cout << mp.n_vehicles << ',' << mp.n_blocks << ',' << mp.sps_periods << ','
              << format_double(mp.resel_prob) << ',' << format_double(mp.period_ms) << ','
              << format_double(fp.p_c) << ',' << format_double(fp.n_idle) << ','
              << fp.iterations << ',' << format_double(fp.residual) << ','
              << format_double(d.p_c_com) << ',' << format_double(d.e_d_total_ms) << '\n';
    return 0;
}

ConfigDoc load_doc(const std::string& path, const std::vector<std::string>& overrides) {
    ConfigDoc doc = ConfigDoc::parse_file(path);
    for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw config_error("--set expects key=value, got '" + kv + "'");
        doc.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return doc;
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw config_error("cannot open output file '" + path + "'");
    out << bytes;
    if (!out) throw config_error("write failed for '" + path + "'");
}

std::string locations_path(const std::string& out_path) {
    const auto dot = out_path.rfind('.');
    if (dot == std::string::npos || out_path.find('/', dot) != std::string::npos)
        return out_path + "_locations";
    return out_path.substr(0, dot) + "_locations" + out_path.substr(dot);
}

void emit_outputs(const std::vector<AggregateResult>& results, const std::string& out_path) {
    std::ostringstream wide;
    write_results_csv(wide, results);
    if (out_path.empty() || out_path == "-") {
        std::cout << wide.str();
    } else {
        write_file(out_path, wide.str());
        if (has_location_rows(results)) {
            std::ostringstream loc;
            write_locations_csv(loc, results);
            write_file(locations_path(out_path), loc.str());
        }
    }
}

int run_simulate(const std::string& config_path, const std::vector<std::string>& overrides,
                 const std::string& out_path, const std::string& trace_path) {
    const ConfigDoc doc = load_doc(config_path, overrides);
    const SweepSpec spec = load_config(doc);
    if (!spec.axes.empty())
        throw config_error("simulate expects a single scenario; use the sweep command for axes");
    const SimConfig cfg = spec.point_config(0);

    std::ofstream trace;
    std::vector<SimMetrics> reps(cfg.replications);
    if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw config_error("cannot open trace file '" + trace_path + "'");
        for (int r = 0; r < cfg.replications; ++r) {
            Simulation sim(cfg);
            sim.set_trace(&trace);
            reps[r] = sim.run(r);
        }
    } else {
        for (int r = 0; r < cfg.replications; ++r) reps[r] = run_replication(cfg, r);
    }

    std::vector<AggregateResult> results(1);
    results[0] = aggregate(reps);
    results[0].config = cfg;
    attach_analytic(results[0], cfg);
    emit_outputs(results, out_path);
    return 0;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path, int jobs) {
    const SweepSpec spec = load_config_file(config_path);
    const auto results = run_sweep(spec, jobs);
    emit_outputs(results, out_path);
    return 0;
}

int run_compare(const std::string& config_path, const std::string& out_path, int jobs,
                std::optional<double> tol_rel, std::optional<double> tol_abs) {
    const SweepSpec spec = load_config_file(config_path);
    const auto results = run_sweep(spec, jobs);
    if (!out_path.empty()) emit_outputs(results, out_path);

    ToleranceProfile tol;
    if (tol_rel) {
        tol.collision.rel = *tol_rel;
        tol.per.rel = *tol_rel;
        tol.delay_ms.rel = *tol_rel;
    }
    if (tol_abs) {
        tol.collision.abs = *tol_abs;
        tol.per.abs = *tol_abs;
        tol.delay_ms.abs = *tol_abs;
    }
    const CompareReport report = compare(results, tol);
    print_report(std::cout, report);
    return report.all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semi-persistent scheduling model and Monte Carlo simulator"};
    app.require_subcommand(1);

    AnalyzeArgs an;
    auto* analyze = app.add_subcommand("analyze", "Evaluate the closed-form model (one CSV row)");
    analyze->add_option("--n-vehicles", an.n_vehicles, "Vehicle count N_v (fully connected mode)");
    analyze->add_option("--n-blocks", an.n_blocks, "Virtual resource blocks per period N_r");
    analyze->add_option("--sps-periods", an.sps_periods, "Transmission periods per SPS period T_s");
    analyze->add_option("--resel-prob", an.resel_prob, "Reselection probability p");
    analyze->add_option("--period-ms", an.period_ms, "Transmission period T_tr in ms");
    double density = 0.0;
    auto* density_opt = analyze->add_option(
        "--density-per-km", density, "Vehicle density; enables hidden-terminal mode");
    analyze->add_option("--range-m", an.range_m, "Transmission range R in meters");

    std::string config_path, out_path, trace_path;
    std::vector<std::string> overrides;
    auto* simulate = app.add_subcommand("simulate", "Simulate one scenario");
    simulate->add_option("--config", config_path, "Scenario file")->required();
    simulate->add_option("--set", overrides, "Override a config key (key=value, repeatable)");
    simulate->add_option("--out", out_path, "Output CSV path ('-' for stdout)");
    simulate->add_option("--trace", trace_path, "Write the per-transmission event trace here");

    std::string sweep_path, sweep_out;
    int jobs = 0;
    auto* sweep = app.add_subcommand("sweep", "Run a sweep spec");
    sweep->add_option("config", sweep_path, "Sweep spec file")->required();
    sweep->add_option("--out", sweep_out, "Output CSV path ('-' for stdout)");
    sweep->add_option("--jobs", jobs, "Worker threads (does not affect output bytes)");

    std::string cmp_path, cmp_out;
    int cmp_jobs = 0;
    double tol_rel = 0.0, tol_abs = 0.0;
    auto* cmp = app.add_subcommand("compare", "Run a sweep and gate the analytic-vs-sim gaps");
    cmp->add_option("config", cmp_path, "Sweep spec file")->required();
    cmp->add_option("--out", cmp_out, "Also write the sweep CSV here");
    cmp->add_option("--jobs", cmp_jobs, "Worker threads");
    auto* rel_opt = cmp->add_option("--tolerance-rel", tol_rel, "Relative tolerance for all metrics");
    auto* abs_opt = cmp->add_option("--tolerance-abs", tol_abs, "Absolute tolerance for all metrics");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*analyze) {
            if (*density_opt) an.density_per_km = density;
            return run_analyze(an);
        }
        if (*simulate) return run_simulate(config_path, overrides, out_path, trace_path);
        if (*sweep) return run_sweep_cmd(sweep_path, sweep_out, jobs);
        if (*cmp)
            return run_compare(cmp_path, cmp_out, cmp_jobs,
                               *rel_opt ? std::optional<double>(tol_rel) : std::nullopt,
                               *abs_opt ? std::optional<double>(tol_abs) : std::nullopt);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
