// Prints the closed-form collision probability and delay over vehicle count
// for a few (T_s, p) settings on the default 200-block / 100 ms grid.

#include <cstdio>

#include "sps/analytic.hpp"

int main() {
    std::printf("n_vehicles,sps_periods,resel_prob,p_c,delay_ms\n");
    for (const auto& [ts, p] : {std::pair{10, 0.2}, {10, 0.5}, {5, 0.2}}) {
        for (int nv = 25; nv <= 175; nv += 25) {
            sps::ModelParams mp;
            mp.n_vehicles = nv;
            mp.sps_periods = ts;
            mp.resel_prob = p;
            const auto fp = sps::solve_fixed_point(mp);
            const auto d = sps::expected_delay(mp, fp.p_c);
            std::printf("%d,%d,%g,%.6f,%.3f\n", nv, ts, p, fp.p_c, d.e_d_total_ms);
        }
    }
    return 0;
}
