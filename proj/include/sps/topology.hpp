#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "sps/error.hpp"
#include "sps/rng.hpp"

namespace sps {

enum class TopologyKind { fully_connected, linear_road };

struct TopologySpec {
    TopologyKind kind = TopologyKind::fully_connected;
    int n_vehicles = 0;          // explicit count; 0 derives it from density
    double density_per_km = 0.0; // linear_road only
    double road_length_m = 0.0;  // linear_road only
    double range_m = 0.0;        // linear_road only

    int vehicle_count() const {
        if (kind == TopologyKind::fully_connected || n_vehicles > 0) return n_vehicles;
        return static_cast<int>(std::llround(density_per_km * road_length_m / 1000.0));
    }

    // Vehicles per km implied by the scenario (linear_road only).
    double density() const {
        if (n_vehicles > 0) return n_vehicles / (road_length_m / 1000.0);
        return density_per_km;
    }

    void validate() const {
        if (kind == TopologyKind::fully_connected) {
            if (n_vehicles < 1)
                throw config_error("topology: fully_connected requires topology.n_vehicles >= 1");
            if (density_per_km != 0.0 || road_length_m != 0.0 || range_m != 0.0)
                throw config_error(
                    "topology: density_per_km/road_length_m/range_m require topology.kind=linear_road");
            return;
        }
        if (!(road_length_m > 0.0))
            throw config_error("topology: linear_road requires topology.road_length_m > 0");
        if (!(range_m > 0.0))
            throw config_error("topology: linear_road requires topology.range_m > 0");
        if (n_vehicles < 0 || (!(density_per_km > 0.0) && n_vehicles == 0))
            throw config_error(
                "topology: linear_road requires topology.n_vehicles or topology.density_per_km");
        if (vehicle_count() < 1) throw config_error("topology has zero vehicles");
    }
};

struct Topology {
    TopologyKind kind = TopologyKind::fully_connected;
    std::vector<double> positions_m; // sorted ascending; empty for fully_connected
    double range_m = 0.0;
    double road_length_m = 0.0;
    int n = 0;

    bool hears(int u, int v) const {
        if (u == v) return false;
        if (kind == TopologyKind::fully_connected) return true;
        return std::abs(positions_m[u] - positions_m[v]) <= range_m;
    }
};

// Static placement for one replication. Linear-road positions are i.i.d.
// uniform on [0, L], stored sorted so vehicle ids follow road order.
inline Topology build_topology(const TopologySpec& spec, Rng& rng) {
    spec.validate();
    Topology t;
    t.kind = spec.kind;
    t.n = spec.vehicle_count();
    if (t.n < 1) throw config_error("topology has zero vehicles");
    if (spec.kind == TopologyKind::linear_road) {
        t.range_m = spec.range_m;
        t.road_length_m = spec.road_length_m;
        t.positions_m.resize(static_cast<std::size_t>(t.n));
        for (auto& p : t.positions_m) p = rng.uniform(0.0, spec.road_length_m);
        std::sort(t.positions_m.begin(), t.positions_m.end());
    }
    return t;
}

} // namespace sps
