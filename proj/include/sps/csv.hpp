#pragma once

#include <ostream>
#include <stdexcept>
#include <vector>

#include "sps/sweep.hpp"
#include "sps/text.hpp"

namespace sps {

// Wide result rows: one per sweep point. Analytic columns stay empty when
// the model does not apply (ana_valid = 0).
inline void write_results_csv(std::ostream& os, const std::vector<AggregateResult>& results) {
    if (results.empty()) throw std::invalid_argument("write_results_csv: no results");
    for (const auto& kv : results[0].point) os << kv.first << ',';
    os << "sim_collision_mean,sim_collision_ci,sim_per_mean,sim_per_ci,"
          "sim_delay_ms_mean,sim_delay_ms_ci,ana_pc,ana_per,ana_delay_ms,ana_valid\n";
    for (const auto& r : results) {
        for (const auto& kv : r.point) os << kv.second << ',';
        os << format_double(r.collision.mean) << ',' << format_double(r.collision.ci) << ','
           << format_double(r.per.mean) << ',' << format_double(r.per.ci) << ','
           << format_double(r.delay_ms.mean) << ',' << format_double(r.delay_ms.ci) << ',';
        if (r.ana_valid) {
            os << format_double(r.ana_pc) << ',' << format_double(r.ana_per) << ','
               << format_double(r.ana_delay_ms) << ",1\n";
        } else {
            os << ",,,0\n";
        }
    }
}

inline bool has_location_rows(const std::vector<AggregateResult>& results) {
    for (const auto& r : results) {
        if (!r.per_by_location.empty()) return true;
    }
    return false;
}

// Long-format per-location PER: one row per (sweep point, bin). `point` is
// the row index in the wide file.
inline void write_locations_csv(std::ostream& os, const std::vector<AggregateResult>& results) {
    os << "point,bin_center_m,per_mean,per_ci\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        for (const auto& bin : results[i].per_by_location) {
            os << i << ',' << format_double(bin.center_m) << ',' << format_double(bin.per.mean)
               << ',' << format_double(bin.per.ci) << '\n';
        }
    }
}

} // namespace sps
