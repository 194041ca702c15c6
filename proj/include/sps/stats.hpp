#pragma once

#include <cmath>
#include <vector>

namespace sps {

// Mean and 95% normal-approximation confidence half-width over replications.
struct MeanCi {
    double mean = 0.0;
    double ci = 0.0; // 1.96 s / sqrt(n); 0 for n < 2
    int n = 0;
};

inline MeanCi mean_ci(const std::vector<double>& xs) {
    MeanCi r;
    r.n = (int)xs.size();
    if (xs.empty()) return r;
    double sum = 0.0;
    for (double x : xs) sum += x;
    r.mean = sum / r.n;
    if (r.n >= 2) {
        double ss = 0.0;
        for (double x : xs) ss += (x - r.mean) * (x - r.mean);
        const double s = std::sqrt(ss / (r.n - 1));
        r.ci = 1.96 * s / std::sqrt((double)r.n);
    }
    return r;
}

} // namespace sps
