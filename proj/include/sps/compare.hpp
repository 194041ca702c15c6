#pragma once

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "sps/sweep.hpp"
#include "sps/text.hpp"

namespace sps {

struct GapTolerance {
    double abs = 0.0;
    double rel = 0.0;

    bool within(double sim, double ana) const {
        return std::abs(sim - ana) <= std::max(abs, rel * std::abs(ana));
    }
};

// Two-sided pass bands, |sim - ana| <= max(abs floor, rel * |ana|). The
// absolute floors absorb Monte Carlo noise near zero.
struct ToleranceProfile {
    GapTolerance collision{0.005, 0.15};
    GapTolerance per{0.01, 0.20};
    GapTolerance delay_ms{3.0, 0.10};
};

struct MetricGap {
    std::string metric;
    double sim = 0.0;
    double ana = 0.0;
    double abs_gap = 0.0;
    double rel_gap = 0.0; // NaN when ana == 0
    bool gated = false;   // counts toward pass/fail
    bool pass = true;
};

struct PointReport {
    std::vector<std::pair<std::string, std::string>> point;
    bool ana_valid = false;
    std::string ana_note;
    std::vector<MetricGap> gaps;
    bool pass = true;
};

struct CompareReport {
    std::vector<PointReport> points;
    bool all_pass = true;
    double worst_abs_gap = 0.0;
    std::string worst_metric;
};

// Analytic-vs-simulation gaps per point. Fully connected points gate
// collision probability, PER and delay; linear-road points gate PER only
// (their transmitter-side and delay predictions are reported but looser by
// construction). Points without a valid analytic column are never gated.
inline CompareReport compare(const std::vector<AggregateResult>& results,
                             const ToleranceProfile& tol = {}) {
    CompareReport report;
    for (const auto& r : results) {
        PointReport pr;
        pr.point = r.point;
        pr.ana_valid = r.ana_valid;
        pr.ana_note = r.ana_note;
        if (r.ana_valid) {
            const bool fully = r.config.topology.kind == TopologyKind::fully_connected;
            auto add = [&](const char* name, double sim, double ana, const GapTolerance& t,
                           bool gated) {
                MetricGap g;
                g.metric = name;
                g.sim = sim;
                g.ana = ana;
                g.abs_gap = std::abs(sim - ana);
                g.rel_gap = ana != 0.0 ? g.abs_gap / std::abs(ana) : std::nan("");
                g.gated = gated;
                g.pass = !gated || t.within(sim, ana);
                pr.gaps.push_back(g);
                pr.pass = pr.pass && g.pass;
                if (g.abs_gap > report.worst_abs_gap) {
                    report.worst_abs_gap = g.abs_gap;
                    report.worst_metric = name;
                }
            };
            add("collision", r.collision.mean, r.ana_pc, tol.collision, fully);
            add("per", r.per.mean, r.ana_per, tol.per, true);
            add("delay_ms", r.delay_ms.mean, r.ana_delay_ms, tol.delay_ms, fully);
        }
        report.all_pass = report.all_pass && pr.pass;
        report.points.push_back(std::move(pr));
    }
    return report;
}

inline void print_report(std::ostream& os, const CompareReport& report) {
    for (const auto& pr : report.points) {
        os << "point";
        for (const auto& kv : pr.point) os << ' ' << kv.first << '=' << kv.second;
        if (!pr.ana_valid) {
            os << ": analytic model not applicable (" << pr.ana_note << ")\n";
            continue;
        }
        os << (pr.pass ? ": pass\n" : ": FAIL\n");
        for (const auto& g : pr.gaps) {
            os << "  " << g.metric << " sim=" << format_double(g.sim)
               << " ana=" << format_double(g.ana) << " gap=" << format_double(g.abs_gap);
            if (!std::isnan(g.rel_gap)) os << " (" << format_double(g.rel_gap * 100.0) << "%)";
            if (!g.gated) {
                os << " [not gated]";
            } else if (!g.pass) {
                os << " [exceeds tolerance]";
            }
            os << '\n';
        }
    }
    os << (report.all_pass ? "result: pass" : "result: FAIL");
    if (!report.worst_metric.empty())
        os << " (worst gap " << format_double(report.worst_abs_gap) << " on " << report.worst_metric
           << ")";
    os << '\n';
}

} // namespace sps
