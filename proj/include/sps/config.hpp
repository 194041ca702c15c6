#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sps/error.hpp"
#include "sps/sim.hpp"
#include "sps/text.hpp"

namespace sps {

inline std::string to_string(Policy p) {
    return p == Policy::uniform_next_period ? "uniform_next_period" : "closest_idle";
}

inline Policy parse_policy(const std::string& s) {
    if (s == "uniform_next_period") return Policy::uniform_next_period;
    if (s == "closest_idle") return Policy::closest_idle;
    throw config_error("protocol.policy: expected uniform_next_period or closest_idle, got '" + s + "'");
}

inline std::string to_string(TopologyKind k) {
    return k == TopologyKind::fully_connected ? "fully_connected" : "linear_road";
}

inline TopologyKind parse_topology_kind(const std::string& s) {
    if (s == "fully_connected") return TopologyKind::fully_connected;
    if (s == "linear_road") return TopologyKind::linear_road;
    throw config_error("topology.kind: expected fully_connected or linear_road, got '" + s + "'");
}

struct ConfigEntry {
    std::string key;
    std::string value;
    int line = 0;
};

// Flat key=value document: one dotted key per line, '#' starts a comment.
class ConfigDoc {
public:
    static ConfigDoc parse_text(const std::string& text) {
        ConfigDoc doc;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const std::string trimmed = trim(line);
            if (trimmed.empty()) continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw config_error("line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(trimmed.substr(0, eq));
            const std::string value = trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw config_error("line " + std::to_string(lineno) + ": empty key");
            if (value.empty())
                throw config_error("line " + std::to_string(lineno) + ": empty value for key '" + key + "'");
            if (doc.find(key))
                throw config_error("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            doc.entries_.push_back({key, value, lineno});
        }
        return doc;
    }

    static ConfigDoc parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw config_error("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        try {
            return parse_text(ss.str());
        } catch (const config_error& e) {
            throw config_error(path + ": " + e.what());
        }
    }

    // CLI-style override: replaces an existing value or appends the key.
    void set(const std::string& key, const std::string& value) {
        for (auto& e : entries_) {
            if (e.key == key) {
                e.value = value;
                return;
            }
        }
        entries_.push_back({key, value, 0});
    }

    const std::string* find(const std::string& key) const {
        for (const auto& e : entries_) {
            if (e.key == key) return &e.value;
        }
        return nullptr;
    }

    const std::vector<ConfigEntry>& entries() const { return entries_; }

private:
    static std::string trim(const std::string& s) {
        const auto a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        const auto b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::vector<ConfigEntry> entries_;
};

namespace detail {

enum class KeyType { integer, real, unsigned64, topology_kind, policy };

inline const std::map<std::string, KeyType>& known_keys() {
    static const std::map<std::string, KeyType> keys = {
        {"grid.n_blocks", KeyType::integer},
        {"grid.blocks_per_subframe", KeyType::integer},
        {"grid.period_ms", KeyType::real},
        {"topology.kind", KeyType::topology_kind},
        {"topology.n_vehicles", KeyType::integer},
        {"topology.density_per_km", KeyType::real},
        {"topology.road_length_m", KeyType::real},
        {"topology.range_m", KeyType::real},
        {"protocol.sps_periods", KeyType::integer},
        {"protocol.resel_prob", KeyType::real},
        {"protocol.policy", KeyType::policy},
        {"run.duration_s", KeyType::real},
        {"run.warmup_s", KeyType::real},
        {"run.replications", KeyType::integer},
        {"run.master_seed", KeyType::unsigned64},
        {"run.location_bins", KeyType::integer},
    };
    return keys;
}

inline const std::vector<std::string>& sweepable_keys() {
    static const std::vector<std::string> keys = {
        "topology.n_vehicles", "topology.density_per_km",
        "protocol.resel_prob", "protocol.sps_periods",
        "protocol.policy",
    };
    return keys;
}

inline void apply_key(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "grid.n_blocks") cfg.grid.n_blocks = (int)parse_int(value, key);
    else if (key == "grid.blocks_per_subframe") cfg.grid.blocks_per_subframe = (int)parse_int(value, key);
    else if (key == "grid.period_ms") cfg.grid.period_ms = parse_double(value, key);
    else if (key == "topology.kind") cfg.topology.kind = parse_topology_kind(value);
    else if (key == "topology.n_vehicles") cfg.topology.n_vehicles = (int)parse_int(value, key);
    else if (key == "topology.density_per_km") cfg.topology.density_per_km = parse_double(value, key);
    else if (key == "topology.road_length_m") cfg.topology.road_length_m = parse_double(value, key);
    else if (key == "topology.range_m") cfg.topology.range_m = parse_double(value, key);
    else if (key == "protocol.sps_periods") cfg.sps_periods = (int)parse_int(value, key);
    else if (key == "protocol.resel_prob") cfg.resel_prob = parse_double(value, key);
    else if (key == "protocol.policy") cfg.policy = parse_policy(value);
    else if (key == "run.duration_s") cfg.duration_s = parse_double(value, key);
    else if (key == "run.warmup_s") cfg.warmup_s = parse_double(value, key);
    else if (key == "run.replications") cfg.replications = (int)parse_int(value, key);
    else if (key == "run.master_seed") cfg.master_seed = parse_u64(value, key);
    else if (key == "run.location_bins") cfg.location_bins = (int)parse_int(value, key);
    else throw config_error("unknown key '" + key + "'");
}

// Canonical (round-trip) spelling of a value for CSV emission.
inline std::string canonical_value(const std::string& key, const std::string& value) {
    const auto& keys = known_keys();
    const auto it = keys.find(key);
    if (it == keys.end()) return value;
    switch (it->second) {
    case KeyType::integer: return format_int(parse_int(value, key));
    case KeyType::real: return format_double(parse_double(value, key));
    case KeyType::unsigned64: return format_uint(parse_u64(value, key));
    case KeyType::topology_kind: return to_string(parse_topology_kind(value));
    case KeyType::policy: return to_string(parse_policy(value));
    }
    return value;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        auto comma = s.find(',', start);
        if (comma == std::string::npos) comma = s.size();
        auto a = s.find_first_not_of(" \t", start);
        if (a == std::string::npos || a >= comma) {
            out.push_back("");
        } else {
            const auto b = s.find_last_not_of(" \t", comma - 1);
            out.push_back(s.substr(a, b - a + 1));
        }
        start = comma + 1;
        if (comma == s.size()) break;
    }
    return out;
}

} // namespace detail

// Resolves a document with no sweep.* keys into a validated scenario.
inline SimConfig build_sim_config(const ConfigDoc& doc) {
    SimConfig cfg;
    for (const auto& e : doc.entries()) {
        try {
            detail::apply_key(cfg, e.key, e.value);
        } catch (const config_error& err) {
            if (e.line > 0)
                throw config_error(std::string(err.what()) + " (line " + std::to_string(e.line) + ")");
            throw;
        }
    }
    cfg.validate();
    return cfg;
}

struct SweepAxis {
    std::string key;
    std::vector<std::string> values;
};

// A base scenario plus cartesian sweep axes. Point order is row-major in
// axis file order: the last listed axis varies fastest.
struct SweepSpec {
    ConfigDoc base;
    std::vector<SweepAxis> axes;
    int max_points = 10000;

    std::size_t point_count() const {
        std::size_t c = 1;
        for (const auto& a : axes) c *= a.values.size();
        return c;
    }

    ConfigDoc point_doc(std::size_t index) const {
        ConfigDoc doc = base;
        std::size_t rest = index;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& axis = axes[a];
            doc.set(axis.key, axis.values[rest % axis.values.size()]);
            rest /= axis.values.size();
        }
        return doc;
    }

    SimConfig point_config(std::size_t index) const { return build_sim_config(point_doc(index)); }

    // (axis key, canonical value) pairs identifying a point.
    std::vector<std::pair<std::string, std::string>> point_values(std::size_t index) const {
        std::vector<std::pair<std::string, std::string>> out(axes.size());
        std::size_t rest = index;
        for (std::size_t a = axes.size(); a-- > 0;) {
            const auto& axis = axes[a];
            const auto& raw = axis.values[rest % axis.values.size()];
            out[a] = {axis.key, detail::canonical_value(axis.key, raw)};
            rest /= axis.values.size();
        }
        return out;
    }
};

// Splits a document into the base scenario and its sweep axes; validates the
// base and every axis value. A document without sweep.* keys yields a
// single-point spec.
inline SweepSpec load_config(const ConfigDoc& doc) {
    SweepSpec spec;
    for (const auto& e : doc.entries()) {
        if (e.key.rfind("sweep.", 0) != 0) {
            spec.base.set(e.key, e.value);
            continue;
        }
        if (e.key == "sweep.max_points") {
            spec.max_points = (int)parse_int(e.value, e.key);
            if (spec.max_points < 1) throw config_error("sweep.max_points must be >= 1");
            continue;
        }
        const std::string target = e.key.substr(6);
        const auto& sweepable = detail::sweepable_keys();
        bool ok = false;
        for (const auto& s : sweepable) ok = ok || s == target;
        if (!ok)
            throw config_error("'" + target + "' is not sweepable (line " + std::to_string(e.line) +
                               "); axes: topology.n_vehicles, topology.density_per_km, "
                               "protocol.resel_prob, protocol.sps_periods, protocol.policy");
        SweepAxis axis;
        axis.key = target;
        axis.values = detail::split_list(e.value);
        if (axis.values.empty()) throw config_error("empty axis '" + e.key + "'");
        for (const auto& v : axis.values) {
            if (v.empty()) throw config_error("empty value in axis '" + e.key + "'");
            detail::canonical_value(target, v); // type check
        }
        spec.axes.push_back(std::move(axis));
    }
    if (spec.point_count() > (std::size_t)spec.max_points)
        throw config_error("sweep has " + std::to_string(spec.point_count()) +
                           " points, above the cap of " + std::to_string(spec.max_points));
    build_sim_config(spec.point_doc(0)); // surface base/axis errors early
    return spec;
}

inline SweepSpec load_config_text(const std::string& text) {
    return load_config(ConfigDoc::parse_text(text));
}

inline SweepSpec load_config_file(const std::string& path) {
    return load_config(ConfigDoc::parse_file(path));
}

} // namespace sps
