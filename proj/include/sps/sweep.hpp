#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sps/analytic.hpp"
#include "sps/config.hpp"
#include "sps/sim.hpp"
#include "sps/stats.hpp"

namespace sps {

struct AggregateResult {
    std::vector<std::pair<std::string, std::string>> point; // (axis key, value)
    SimConfig config;
    int replications = 0;
    MeanCi collision, per, delay_ms;
    struct LocBin {
        double center_m = 0.0;
        MeanCi per;
    };
    std::vector<LocBin> per_by_location;
    bool ana_valid = false;
    double ana_pc = 0.0;
    double ana_per = 0.0;
    double ana_delay_ms = 0.0;
    std::string ana_note; // set when the analytic model is not applicable
};

// Replication averages and confidence intervals; per_by_location is averaged
// bin-wise.
inline AggregateResult aggregate(const std::vector<SimMetrics>& reps) {
    if (reps.empty()) throw std::invalid_argument("aggregate: need at least one replication");
    AggregateResult r;
    r.replications = (int)reps.size();
    std::vector<double> xs(reps.size());
    for (std::size_t i = 0; i < reps.size(); ++i) xs[i] = reps[i].tx_collision_ratio;
    r.collision = mean_ci(xs);
    for (std::size_t i = 0; i < reps.size(); ++i) xs[i] = reps[i].per;
    r.per = mean_ci(xs);
    for (std::size_t i = 0; i < reps.size(); ++i) xs[i] = reps[i].mean_delay_ms;
    r.delay_ms = mean_ci(xs);
    const std::size_t nbins = reps[0].location_bins.size();
    r.per_by_location.resize(nbins);
    for (std::size_t b = 0; b < nbins; ++b) {
        for (std::size_t i = 0; i < reps.size(); ++i) xs[i] = reps[i].location_bins[b].per();
        r.per_by_location[b].center_m = reps[0].location_bins[b].center_m;
        r.per_by_location[b].per = mean_ci(xs);
    }
    return r;
}

// Analytic predictions for one scenario. Fully connected points use the
// fixed point directly (PER equals collision probability there); linear-road
// points map the expected in-range population onto a local fixed point and
// apply the hidden-terminal extension. Densities outside the model's domain
// leave the row marked invalid.
inline void attach_analytic(AggregateResult& r, const SimConfig& cfg) {
    try {
        if (cfg.topology.kind == TopologyKind::fully_connected) {
            const ModelParams mp{cfg.topology.n_vehicles, cfg.grid.n_blocks, cfg.sps_periods,
                                 cfg.resel_prob, cfg.grid.period_ms};
            const FixedPointSolution fp = solve_fixed_point(mp);
            r.ana_pc = fp.p_c;
            r.ana_per = fp.p_c;
            r.ana_delay_ms = expected_delay(mp, fp.p_c).e_d_total_ms;
        } else {
            const HiddenTerminalParams ht{cfg.topology.density(), cfg.topology.range_m,
                                          cfg.topology.road_length_m};
            const ModelParams mp{local_vehicle_count(ht), cfg.grid.n_blocks, cfg.sps_periods,
                                 cfg.resel_prob, cfg.grid.period_ms};
            const HiddenTerminalSolution sol = solve_hidden_terminal(mp, ht);
            r.ana_pc = sol.p_c_ht;
            r.ana_per = sol.per;
            r.ana_delay_ms = sol.e_d_total_ms;
        }
        r.ana_valid = true;
    } catch (const std::domain_error& e) { // model_error included
        r.ana_valid = false;
        r.ana_note = e.what();
    }
}

// Runs every cartesian point of the sweep, `jobs` replications in flight at
// a time (0 = hardware concurrency). Output is identical for any job count:
// tasks land in preallocated slots and are aggregated in point order.
inline std::vector<AggregateResult> run_sweep(const SweepSpec& spec, int jobs = 0) {
    const std::size_t npoints = spec.point_count();
    std::vector<SimConfig> configs(npoints);
    for (std::size_t i = 0; i < npoints; ++i) configs[i] = spec.point_config(i);

    struct Task {
        std::size_t point;
        int rep;
    };
    std::vector<Task> tasks;
    std::vector<std::vector<SimMetrics>> metrics(npoints);
    for (std::size_t i = 0; i < npoints; ++i) {
        metrics[i].resize(configs[i].replications);
        for (int rep = 0; rep < configs[i].replications; ++rep) tasks.push_back({i, rep});
    }

    if (jobs <= 0) jobs = (int)std::thread::hardware_concurrency();
    if (jobs < 1) jobs = 1;
    if ((std::size_t)jobs > tasks.size()) jobs = (int)tasks.size();

    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size()) return;
            try {
                metrics[tasks[t].point][tasks[t].rep] =
                    run_replication(configs[tasks[t].point], tasks[t].rep);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(jobs);
        for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<AggregateResult> results(npoints);
    for (std::size_t i = 0; i < npoints; ++i) {
        results[i] = aggregate(metrics[i]);
        results[i].point = spec.point_values(i);
        results[i].config = configs[i];
        attach_analytic(results[i], configs[i]);
    }
    return results;
}

} // namespace sps
