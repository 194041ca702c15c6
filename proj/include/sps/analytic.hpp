#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "sps/error.hpp"

namespace sps {

// Inputs of the collision / delay model.
struct ModelParams {
    int n_vehicles = 1;       // N_v
    int n_blocks = 200;       // N_r, virtual resource blocks per transmission period
    int sps_periods = 10;     // T_s, transmission periods per semi-persistent period
    double resel_prob = 0.2;  // p, reselection probability at each SPS boundary
    double period_ms = 100.0; // T_tr

    void validate() const {
        if (n_vehicles < 1) throw std::domain_error("ModelParams: n_vehicles must be >= 1");
        if (n_blocks < 1) throw std::domain_error("ModelParams: n_blocks must be >= 1");
        if (sps_periods < 1) throw std::domain_error("ModelParams: sps_periods must be >= 1");
        if (!(resel_prob >= 0.0 && resel_prob <= 1.0))
            throw std::domain_error("ModelParams: resel_prob must be in [0,1]");
        if (!(period_ms > 0.0)) throw std::domain_error("ModelParams: period_ms must be > 0");
    }

    // The closed forms are undefined once vehicles can outnumber blocks:
    // the expected idle count may reach zero.
    void require_model_valid() const {
        validate();
        if (n_vehicles >= n_blocks)
            throw model_error("model requires n_vehicles < n_blocks (got " +
                              std::to_string(n_vehicles) + " >= " + std::to_string(n_blocks) + ")");
    }
};

struct FixedPointSolution {
    double p_c = 0.0;    // overall collision probability
    double n_idle = 0.0; // expected idle blocks at the solution
    int iterations = 0;
    double residual = 0.0;
};

struct DelayStats {
    double e_d_ini_ms = 0.0;
    double e_d_col_ms = 0.0;
    double e_d_total_ms = 0.0;
    double p_c_com = 0.0; // combined per-SPS-window collision probability
};

// Probability that exactly n of the N_v-1 peers reselect at a boundary in
// one transmission period: Binomial(N_v-1, p/T_s) mass at n.
inline double reselect_prob_mass(int n, const ModelParams& params) {
    params.validate();
    const int peers = params.n_vehicles - 1;
    if (n < 0 || n > peers)
        throw std::domain_error("reselect_prob_mass: n must be in [0, n_vehicles-1]");
    const double q = params.resel_prob / params.sps_periods;
    if (q == 0.0) return n == 0 ? 1.0 : 0.0;
    if (q == 1.0) return n == peers ? 1.0 : 0.0;
    const double lp = std::lgamma(peers + 1.0) - std::lgamma(n + 1.0) -
                      std::lgamma(peers - n + 1.0) + n * std::log(q) +
                      (peers - n) * std::log1p(-q);
    return std::exp(lp);
}

// Expected idle blocks a vehicle senses over one period, given the overall
// collision probability: N_r - N_v + P_c (N_v - 1) / 2.
inline double expected_idle(const ModelParams& params, double p_c) {
    params.validate();
    if (!(p_c >= 0.0 && p_c <= 1.0))
        throw std::domain_error("expected_idle: p_c must be in [0,1]");
    return params.n_blocks - params.n_vehicles + p_c * (params.n_vehicles - 1) / 2.0;
}

// Probability that at least one simultaneously reselecting peer lands on the
// tagged vehicle's block: 1 - (1 - p / (T_s n_idle))^(N_v - 1). Equal to the
// explicit sum over the binomial reselector count (tested identity).
inline double collision_case1(const ModelParams& params, double n_idle) {
    params.validate();
    if (!(n_idle >= 1.0))
        throw model_error("collision_case1: n_idle < 1, sensing saw no idle block");
    const int exponent = params.n_vehicles - 1;
    if (exponent == 0) return 0.0;
    const double q = params.resel_prob / params.sps_periods;
    if (q == 0.0) return 0.0;
    const double ratio = q / n_idle;
    if (ratio >= 1.0) return 1.0;
    return -std::expm1(exponent * std::log1p(-ratio));
}

namespace detail {

inline double fixed_point_rhs(const ModelParams& params, double x) {
    return collision_case1(params, expected_idle(params, x)) / (2.0 - params.resel_prob);
}

} // namespace detail

// Solves P_c = RHS(P_c) with RHS from collision_case1 over expected_idle.
// Damped Picard iteration (alpha = 0.5, start 0), bisection fallback on
// x - RHS(x), which is strictly increasing on [0,1].
inline FixedPointSolution solve_fixed_point(const ModelParams& params) {
    params.require_model_valid();
    constexpr double tol = 1e-10;
    constexpr int max_iterations = 10000;
    constexpr double damping = 0.5;

    double x = 0.0;
    int iterations = 0;
    double residual = std::abs(x - detail::fixed_point_rhs(params, x));
    while (residual > tol && iterations < max_iterations) {
        x = (1.0 - damping) * x + damping * detail::fixed_point_rhs(params, x);
        residual = std::abs(x - detail::fixed_point_rhs(params, x));
        ++iterations;
    }
    if (residual > tol) {
        double lo = 0.0, hi = 1.0;
        for (int i = 0; i < 200 && residual > tol; ++i) {
            const double mid = 0.5 * (lo + hi);
            const double g = mid - detail::fixed_point_rhs(params, mid);
            (g < 0.0 ? lo : hi) = mid;
            x = mid;
            residual = std::abs(g);
            ++iterations;
        }
    }
    if (!(residual <= tol))
        throw solver_error("solve_fixed_point: no convergence within iteration cap", x, residual);

    FixedPointSolution sol;
    sol.p_c = x;
    sol.n_idle = expected_idle(params, x);
    sol.iterations = iterations;
    sol.residual = residual;
    return sol;
}

// Collision probability of the combined SPS-window slot:
// P_c / (T_s - (T_s - 1) P_c). Degenerates to 1 at P_c = 1.
inline double combined_collision_prob(double p_c, int sps_periods) {
    if (sps_periods < 1) throw std::domain_error("combined_collision_prob: sps_periods must be >= 1");
    if (!(p_c >= 0.0 && p_c <= 1.0))
        throw std::domain_error("combined_collision_prob: p_c must be in [0,1]");
    return p_c / (sps_periods - (sps_periods - 1) * p_c);
}

// Expected delay split into the uniform initial part (T_tr / 2) and the
// geometric loss part over combined SPS-window slots.
inline DelayStats expected_delay(const ModelParams& params, double p_c) {
    params.validate();
    if (!(p_c >= 0.0 && p_c <= 1.0))
        throw std::domain_error("expected_delay: p_c must be in [0,1]");
    DelayStats d;
    d.p_c_com = combined_collision_prob(p_c, params.sps_periods);
    if (d.p_c_com >= 1.0)
        throw model_error("expected_delay: combined collision probability is 1, delay diverges");
    d.e_d_ini_ms = params.period_ms / 2.0;
    d.e_d_col_ms =
        params.sps_periods * params.period_ms * d.p_c_com / (1.0 - d.p_c_com);
    d.e_d_total_ms = d.e_d_ini_ms + d.e_d_col_ms;
    return d;
}

// Partially connected delay: same decomposition with the packet error ratio
// as the loss probability.
inline DelayStats delay_partial(const ModelParams& params, double per) {
    return expected_delay(params, per);
}

// Linear-road surroundings of a tagged vehicle.
struct HiddenTerminalParams {
    double density_per_km = 0.0; // beta
    double range_m = 0.0;        // R
    // L; infinity marks the unbounded road of the closed forms.
    double road_length_m = std::numeric_limits<double>::infinity();

    void validate() const {
        if (!(density_per_km >= 0.0))
            throw std::domain_error("HiddenTerminalParams: density_per_km must be >= 0");
        if (!(range_m > 0.0))
            throw std::domain_error("HiddenTerminalParams: range_m must be > 0");
        if (!(road_length_m > 0.0))
            throw std::domain_error("HiddenTerminalParams: road_length_m must be > 0");
    }

    // beta R with beta per meter: expected vehicles within R on one side.
    double vehicles_in_range() const { return density_per_km / 1000.0 * range_m; }
};

struct HiddenTerminalSolution {
    double p_single = 1.0;     // per-hidden-vehicle non-collision probability
    double p_c_ht = 0.0;       // transmitter-side collision probability with hidden terminals
    double per = 0.0;          // receiver-side packet error ratio
    double p_del = 1.0;        // delivery ratio without hidden terminals, 1 - P_c
    double e_d_total_ms = 0.0; // average delay computed from PER
};

// Probability that one hidden-range vehicle, choosing among the N_r - beta R
// blocks it does not see occupied, avoids the tagged vehicle's block.
inline double p_single(int n_blocks, const HiddenTerminalParams& ht) {
    ht.validate();
    if (n_blocks < 1) throw std::domain_error("p_single: n_blocks must be >= 1");
    const double free_blocks = n_blocks - ht.vehicles_in_range();
    if (!(free_blocks > 1.0))
        throw model_error("p_single: hidden-range vehicles have no free block (N_r - beta R <= 1)");
    return (free_blocks - 1.0) / free_blocks;
}

// Transmitter-side collision probability with the 2 beta R possible hidden
// terminals: 1 - (1 - P_c) P_single^(2 beta R).
inline double collision_with_hidden(double p_c, int n_blocks, const HiddenTerminalParams& ht) {
    if (!(p_c >= 0.0 && p_c <= 1.0))
        throw std::domain_error("collision_with_hidden: p_c must be in [0,1]");
    const double ps = p_single(n_blocks, ht);
    const double n_ht = 2.0 * ht.vehicles_in_range();
    return 1.0 - (1.0 - p_c) * std::pow(ps, n_ht);
}

// Receiver-side packet error ratio averaged over receiver distance:
// 1 - (1 - P_c) (P_single^(beta R) - 1) / (beta R ln P_single).
// The beta R -> 0 singularity is removable; the limit is P_c.
inline double packet_error_ratio(double p_c, int n_blocks, const HiddenTerminalParams& ht) {
    if (!(p_c >= 0.0 && p_c <= 1.0))
        throw std::domain_error("packet_error_ratio: p_c must be in [0,1]");
    const double ps = p_single(n_blocks, ht);
    const double br = ht.vehicles_in_range();
    if (br < 1e-9) return p_c;
    return 1.0 - (1.0 - p_c) * (std::pow(ps, br) - 1.0) / (br * std::log(ps));
}

// Expected fully connected vehicle count a tagged vehicle experiences on an
// unbounded road: itself plus the 2 beta R vehicles in range.
inline int local_vehicle_count(const HiddenTerminalParams& ht) {
    return static_cast<int>(std::llround(2.0 * ht.vehicles_in_range())) + 1;
}

// Full partially connected evaluation: local fixed point, hidden-terminal
// collision, PER, and the PER-based delay.
inline HiddenTerminalSolution solve_hidden_terminal(const ModelParams& params,
                                                    const HiddenTerminalParams& ht) {
    const FixedPointSolution fp = solve_fixed_point(params);
    HiddenTerminalSolution s;
    s.p_single = p_single(params.n_blocks, ht);
    s.p_c_ht = collision_with_hidden(fp.p_c, params.n_blocks, ht);
    s.per = packet_error_ratio(fp.p_c, params.n_blocks, ht);
    s.p_del = 1.0 - fp.p_c;
    s.e_d_total_ms = delay_partial(params, s.per).e_d_total_ms;
    return s;
}

} // namespace sps
