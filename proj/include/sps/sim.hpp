#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "sps/error.hpp"
#include "sps/grid.hpp"
#include "sps/rng.hpp"
#include "sps/topology.hpp"

namespace sps {

enum class Policy { uniform_next_period, closest_idle };

struct SimConfig {
    GridShape grid;
    TopologySpec topology;
    int sps_periods = 10;    // T_s
    double resel_prob = 0.2; // p
    Policy policy = Policy::uniform_next_period;
    double duration_s = 2000.0;
    double warmup_s = -1.0; // < 0: default max(10, 3 T_s T_tr / 1000) seconds
    int replications = 10;
    std::uint64_t master_seed = 1;
    int location_bins = 30; // per-location PER resolution, linear_road only

    double effective_warmup_s() const {
        if (warmup_s >= 0.0) return warmup_s;
        return std::max(10.0, 3.0 * sps_periods * grid.period_ms / 1000.0);
    }

    std::vector<std::string> problems() const {
        std::vector<std::string> out;
        try {
            grid.validate();
        } catch (const std::exception& e) {
            out.push_back(e.what());
        }
        try {
            topology.validate();
        } catch (const std::exception& e) {
            out.push_back(e.what());
        }
        if (sps_periods < 1) out.push_back("protocol.sps_periods must be >= 1");
        if (!(resel_prob >= 0.0 && resel_prob <= 1.0))
            out.push_back("protocol.resel_prob must be in [0,1]");
        if (!(duration_s > 0.0)) {
            out.push_back("run.duration_s must be > 0");
        } else if (!(effective_warmup_s() < duration_s)) {
            out.push_back("run.warmup_s must be < run.duration_s");
        }
        if (replications < 1) out.push_back("run.replications must be >= 1");
        if (location_bins < 1) out.push_back("run.location_bins must be >= 1");
        return out;
    }

    void validate() const {
        const auto p = problems();
        if (p.empty()) return;
        std::string msg = "invalid configuration:";
        for (const auto& s : p) msg += "\n  - " + s;
        throw config_error(msg);
    }
};

// Busy-block bitmask over one transmission period.
class BlockMask {
public:
    explicit BlockMask(int n_blocks = 0) { reset(n_blocks); }

    void reset(int n_blocks) {
        n_ = n_blocks;
        words_.assign((n_blocks + 63) / 64, 0);
    }
    void clear() { std::fill(words_.begin(), words_.end(), 0); }
    void set(int b) { words_[b >> 6] |= 1ULL << (b & 63); }
    bool test(int b) const { return (words_[b >> 6] >> (b & 63)) & 1; }
    int size() const { return n_; }
    int count_busy() const {
        int c = 0;
        for (auto w : words_) c += std::popcount(w);
        return c;
    }
    int count_idle() const { return n_ - count_busy(); }

private:
    int n_ = 0;
    std::vector<std::uint64_t> words_;
};

// Uniform draw over the idle blocks; uniform over all blocks when every
// block was sensed busy.
inline int select_uniform(const BlockMask& busy, Rng& rng) {
    const int idle = busy.count_idle();
    if (idle == 0) return (int)rng.below(busy.size());
    int k = (int)rng.below(idle);
    for (int b = 0; b < busy.size(); ++b) {
        if (!busy.test(b) && k-- == 0) return b;
    }
    return busy.size() - 1; // unreachable
}

// Idle block with the smallest time offset at or after the arrival offset,
// wrapping to the next period when the current one has none left. Ties
// within a subframe break uniformly at random. Falls back like
// select_uniform when no block is idle at all.
inline int select_closest(const BlockMask& busy, double arrival_offset_ms, const GridShape& grid,
                          Rng& rng) {
    const int nsub = grid.subframes();
    const int bps = grid.blocks_per_subframe;
    const int s0 = (int)std::ceil(arrival_offset_ms / grid.subframe_ms());
    for (int step = 0; step < nsub; ++step) {
        const int s = (s0 + step) % nsub;
        const int first = s * bps;
        int idle_here = 0;
        for (int b = first; b < first + bps; ++b) idle_here += !busy.test(b);
        if (idle_here == 0) continue;
        int k = (int)rng.below(idle_here);
        for (int b = first; b < first + bps; ++b) {
            if (!busy.test(b) && k-- == 0) return b;
        }
    }
    return (int)rng.below(busy.size());
}

// Idle blocks vehicle v can select from: blocks not heard busy from v's
// listening range over the last period, minus v's own held block.
inline std::vector<int> sense_idle(const GridShape& grid, const std::vector<int>& blocks,
                                   const Topology& topo, int v) {
    BlockMask busy(grid.n_blocks);
    for (int w = 0; w < topo.n; ++w) {
        if (topo.hears(w, v)) busy.set(blocks[w]);
    }
    busy.set(blocks[v]);
    std::vector<int> idle;
    for (int b = 0; b < grid.n_blocks; ++b) {
        if (!busy.test(b)) idle.push_back(b);
    }
    return idle;
}

// Reference reception outcomes of one period. success[u][v] holds for every
// in-range ordered pair (u -> v): v receives u iff no vehicle audible at v
// (v's own transmission included) used u's block. tx_collided[u] is the OR
// over u's receivers.
struct DeliverResult {
    std::vector<std::vector<std::uint8_t>> success;
    std::vector<std::uint8_t> tx_collided;
};

inline DeliverResult deliver(const std::vector<int>& blocks, const Topology& topo) {
    const int n = topo.n;
    DeliverResult r;
    r.success.assign(n, std::vector<std::uint8_t>(n, 0));
    r.tx_collided.assign(n, 0);
    for (int u = 0; u < n; ++u) {
        for (int v = 0; v < n; ++v) {
            if (!topo.hears(u, v)) continue;
            bool ok = true;
            for (int w = 0; w < n && ok; ++w) {
                if (w != u && blocks[w] == blocks[u] && (w == v || topo.hears(w, v))) ok = false;
            }
            r.success[u][v] = ok;
            if (!ok) r.tx_collided[u] = 1;
        }
    }
    return r;
}

struct LocationBin {
    double center_m = 0.0;
    std::int64_t misses = 0;
    std::int64_t expected = 0;
    double per() const { return expected > 0 ? (double)misses / (double)expected : 0.0; }
};

struct SimMetrics {
    double tx_collision_ratio = 0.0;
    double per = 0.0;
    std::vector<std::pair<double, double>> per_by_location; // (bin center m, per)
    double mean_delay_ms = 0.0;
    std::int64_t delay_samples_count = 0;
    std::int64_t transmissions_total = 0;
    std::int64_t collisions_total = 0;
    std::int64_t missed_receptions = 0;
    std::int64_t expected_receptions = 0;
    std::int64_t measured_periods = 0;
    std::vector<LocationBin> location_bins; // linear_road only
};

// One-replication discrete-time simulator of the semi-persistent scheduler.
//
// Every vehicle keeps its block for T_s consecutive periods per selection.
// The SPS windows of different vehicles are independently phased: vehicle v
// reaches a boundary every T_s periods starting at a phase offset drawn
// uniformly from {0..T_s-1}. A peer therefore shares a given vehicle's
// reselection period with probability 1/T_s, which is what makes the
// per-period reselection probability p/T_s of the closed-form model come
// out of the protocol.
//
// Deterministic given (config, replication index); all randomness comes from
// one per-replication stream seeded with derive_seed(master_seed, index).
// Draw order: linear-road positions, initial blocks, SPS phase offsets,
// generation phases (closest_idle only), then one Bernoulli per vehicle per
// own boundary followed by that vehicle's selection draws, in vehicle order
// within a period.
//
// Fully connected topologies take an O(n) per-period metrics path: a
// transmission there either succeeds at every receiver or at none, so
// per-receiver outcomes collapse onto the transmitter. force_generic_metrics
// runs the per-pair path instead; both must produce the same metrics.
class Simulation {
public:
    explicit Simulation(SimConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

    // Debug trace, one line per transmission: "<period> <vehicle> <block> ok|col".
    void set_trace(std::ostream* os) { trace_ = os; }

    // Test hook: run the per-pair metrics path on fully connected topologies.
    void force_generic_metrics(bool on) { force_generic_ = on; }

    // Test hooks: fix the placement / initial assignment instead of drawing.
    void set_positions(std::vector<double> positions_m) { fixed_positions_ = std::move(positions_m); }
    void set_initial_blocks(std::vector<int> blocks) { fixed_blocks_ = std::move(blocks); }

    const Topology& topology() const { return topo_; }
    const std::vector<double>& generation_phases() const { return phase_; }
    const std::vector<int>& sps_phases() const { return sps_phase_; }

    SimMetrics run(int replication_index);

private:
    void reselect_boundary(std::int64_t next_period, Rng& rng);
    void period_fully(std::int64_t k, bool measure);
    void period_generic(std::int64_t k, bool measure);

    void success_pair(int u, int v, std::int64_t k, double off_u, int jnext, bool measure) {
        std::int32_t& pend = pend_[pair_base_[u] + (v - lo_[u])];
        if (measure) {
            delay_sum_ += (double)(k - pend) * cfg_.grid.period_ms + off_u - phase_[u];
            ++delay_count_;
        }
        pend = (std::int32_t)(k + jnext);
    }

    SimConfig cfg_;
    std::ostream* trace_ = nullptr;
    bool force_generic_ = false;
    std::vector<double> fixed_positions_;
    std::vector<int> fixed_blocks_;

    Topology topo_;
    std::vector<int> lo_, hi_; // inclusive in-range index window per vehicle
    std::vector<int> bin_;
    std::vector<double> offset_ms_;
    std::vector<double> phase_;
    std::vector<int> sps_phase_;
    std::vector<int> blocks_;
    std::vector<std::pair<int, int>> pending_sel_; // (vehicle, new block) of one boundary
    std::vector<int> count_, start_, fill_pos_, users_;
    std::vector<int> cousers_;
    std::vector<std::int64_t> pair_base_;
    std::vector<std::int32_t> pend_;    // per ordered pair: oldest pending BSM index
    std::vector<std::int32_t> pend_tx_; // fast path: shared by all of u's receivers
    std::vector<std::int64_t> bin_miss_, bin_expected_pp_;
    BlockMask busy_;

    std::int64_t tx_total_ = 0, coll_total_ = 0, miss_total_ = 0;
    double delay_sum_ = 0.0;
    std::int64_t delay_count_ = 0;
    std::int64_t deg_sum_pp_ = 0;
};

inline SimMetrics Simulation::run(int replication_index) {
    Rng rng(derive_seed(cfg_.master_seed, (std::uint64_t)replication_index));

    if (!fixed_positions_.empty()) {
        topo_.kind = TopologyKind::linear_road;
        topo_.positions_m = fixed_positions_;
        std::sort(topo_.positions_m.begin(), topo_.positions_m.end());
        topo_.range_m = cfg_.topology.range_m;
        topo_.road_length_m = cfg_.topology.road_length_m;
        topo_.n = (int)topo_.positions_m.size();
    } else {
        topo_ = build_topology(cfg_.topology, rng);
    }

    const GridShape& grid = cfg_.grid;
    const int n = topo_.n;
    const int nb = grid.n_blocks;
    const bool linear = topo_.kind == TopologyKind::linear_road;
    const bool generic = linear || force_generic_;

    const std::int64_t total_periods = std::llround(cfg_.duration_s * 1000.0 / grid.period_ms);
    const std::int64_t warmup_periods =
        std::llround(cfg_.effective_warmup_s() * 1000.0 / grid.period_ms);
    if (total_periods <= warmup_periods)
        throw config_error("run window rounds to zero measured periods");
    if (total_periods >= std::numeric_limits<std::int32_t>::max() / 2)
        throw config_error("run.duration_s too long for the period ledger");

    lo_.assign(n, 0);
    hi_.assign(n, n - 1);
    if (linear) {
        const auto& pos = topo_.positions_m;
        for (int i = 0, l = 0; i < n; ++i) {
            while (pos[i] - pos[l] > topo_.range_m) ++l;
            lo_[i] = l;
        }
        for (int i = n - 1, h = n - 1; i >= 0; --i) {
            while (pos[h] - pos[i] > topo_.range_m) --h;
            hi_[i] = h;
        }
    }

    const int nbins = linear ? cfg_.location_bins : 0;
    bin_.assign(n, 0);
    if (nbins > 0) {
        const double width = topo_.road_length_m / nbins;
        for (int i = 0; i < n; ++i)
            bin_[i] = std::min(nbins - 1, (int)(topo_.positions_m[i] / width));
    }
    bin_miss_.assign(std::max(nbins, 1), 0);
    bin_expected_pp_.assign(std::max(nbins, 1), 0);
    deg_sum_pp_ = 0;
    for (int v = 0; v < n; ++v) {
        const std::int64_t deg = hi_[v] - lo_[v];
        deg_sum_pp_ += deg;
        if (nbins > 0) bin_expected_pp_[bin_[v]] += deg;
    }

    offset_ms_.resize(nb);
    for (int b = 0; b < nb; ++b) offset_ms_[b] = grid.offset_ms(b);

    if (!fixed_blocks_.empty()) {
        if ((int)fixed_blocks_.size() != n)
            throw config_error("set_initial_blocks: size does not match vehicle count");
        blocks_ = fixed_blocks_;
    } else {
        blocks_.resize(n);
        for (auto& b : blocks_) b = (int)rng.below(nb);
    }
    sps_phase_.resize(n);
    for (auto& ph : sps_phase_) ph = (int)rng.below(cfg_.sps_periods);
    phase_.assign(n, 0.0);
    if (cfg_.policy == Policy::closest_idle) {
        for (auto& p : phase_) p = rng.uniform(0.0, grid.period_ms);
    }

    pending_sel_.clear();
    count_.assign(nb, 0);
    start_.assign(nb + 1, 0);
    fill_pos_.assign(nb, 0);
    users_.assign(n, 0);
    busy_.reset(nb);

    pair_base_.assign(n, 0);
    if (generic) {
        std::int64_t slots = 0;
        for (int u = 0; u < n; ++u) {
            pair_base_[u] = slots;
            slots += hi_[u] - lo_[u] + 1;
        }
        pend_.assign(slots, 0);
    } else {
        pend_tx_.assign(n, 0);
    }

    tx_total_ = coll_total_ = miss_total_ = 0;
    delay_sum_ = 0.0;
    delay_count_ = 0;

    for (std::int64_t k = 0; k < total_periods; ++k) {
        const bool measure = k >= warmup_periods;
        std::fill(count_.begin(), count_.end(), 0);
        for (int i = 0; i < n; ++i) ++count_[blocks_[i]];
        if (generic) {
            period_generic(k, measure);
        } else {
            period_fully(k, measure);
        }
        reselect_boundary(k + 1, rng);
    }

    SimMetrics m;
    m.measured_periods = total_periods - warmup_periods;
    m.transmissions_total = tx_total_;
    m.collisions_total = coll_total_;
    m.tx_collision_ratio = tx_total_ > 0 ? (double)coll_total_ / (double)tx_total_ : 0.0;
    m.missed_receptions = miss_total_;
    m.expected_receptions = deg_sum_pp_ * m.measured_periods;
    m.per = m.expected_receptions > 0 ? (double)miss_total_ / (double)m.expected_receptions : 0.0;
    m.mean_delay_ms = delay_count_ > 0 ? delay_sum_ / (double)delay_count_ : 0.0;
    m.delay_samples_count = delay_count_;
    if (nbins > 0) {
        const double width = topo_.road_length_m / nbins;
        m.location_bins.resize(nbins);
        m.per_by_location.resize(nbins);
        for (int i = 0; i < nbins; ++i) {
            LocationBin& lb = m.location_bins[i];
            lb.center_m = (i + 0.5) * width;
            lb.misses = bin_miss_[i];
            lb.expected = bin_expected_pp_[i] * m.measured_periods;
            m.per_by_location[i] = {lb.center_m, lb.per()};
        }
    }
    return m;
}

inline void Simulation::period_fully(std::int64_t k, bool measure) {
    const int n = topo_.n;
    const double period = cfg_.grid.period_ms;
    for (int u = 0; u < n; ++u) {
        const int b = blocks_[u];
        const bool col = n > 1 && count_[b] > 1;
        if (measure) {
            ++tx_total_;
            if (col) {
                ++coll_total_;
                miss_total_ += n - 1;
            }
        }
        if (n > 1 && !col) {
            const double off_u = offset_ms_[b];
            std::int32_t& pend = pend_tx_[u];
            if (measure) {
                delay_sum_ += ((double)(k - pend) * period + off_u - phase_[u]) * (n - 1);
                delay_count_ += n - 1;
            }
            pend = (std::int32_t)(k + (off_u >= phase_[u] ? 1 : 0));
        }
        if (trace_) *trace_ << k << ' ' << u << ' ' << b << (col ? " col\n" : " ok\n");
    }
}

inline void Simulation::period_generic(std::int64_t k, bool measure) {
    const int n = topo_.n;
    const bool linear = topo_.kind == TopologyKind::linear_road;
    const int nbins = linear ? cfg_.location_bins : 0;
    const auto& pos = topo_.positions_m;

    start_[0] = 0;
    for (int b = 0; b < cfg_.grid.n_blocks; ++b) start_[b + 1] = start_[b] + count_[b];
    std::copy(start_.begin(), start_.end() - 1, fill_pos_.begin());
    for (int i = 0; i < n; ++i) users_[fill_pos_[blocks_[i]]++] = i;

    for (int u = 0; u < n; ++u) {
        const int b = blocks_[u];
        const double off_u = offset_ms_[b];
        const int jnext = off_u >= phase_[u] ? 1 : 0;
        const int lo = lo_[u];
        const int hi = hi_[u];
        bool col = false;
        if (measure) ++tx_total_;

        bool sole = count_[b] == 1;
        if (!sole) {
            cousers_.clear();
            for (int idx = start_[b]; idx < start_[b + 1]; ++idx) {
                const int w = users_[idx];
                if (w == u) continue;
                if (linear && std::abs(pos[w] - pos[u]) > 2.0 * topo_.range_m)
                    continue; // shares no receiver with u
                cousers_.push_back(w);
            }
            sole = cousers_.empty();
        }

        if (sole) {
            for (int v = lo; v <= hi; ++v) {
                if (v != u) success_pair(u, v, k, off_u, jnext, measure);
            }
        } else if (!linear) {
            // fully connected: a co-user is audible at every receiver
            col = true;
            if (measure) miss_total_ += hi - lo;
        } else {
            for (int v = lo; v <= hi; ++v) {
                if (v == u) continue;
                bool failed = false;
                for (const int w : cousers_) {
                    if (w == v || (v >= lo_[w] && v <= hi_[w])) {
                        failed = true;
                        break;
                    }
                }
                if (failed) {
                    col = true;
                    if (measure) {
                        ++miss_total_;
                        if (nbins > 0) ++bin_miss_[bin_[v]];
                    }
                } else {
                    success_pair(u, v, k, off_u, jnext, measure);
                }
            }
        }
        if (measure && col) ++coll_total_;
        if (trace_) *trace_ << k << ' ' << u << ' ' << b << (col ? " col\n" : " ok\n");
    }
}

inline void Simulation::reselect_boundary(std::int64_t next_period, Rng& rng) {
    const int n = topo_.n;
    const int ts = cfg_.sps_periods;
    // vehicles whose own SPS window ends here; all of them draw against the
    // same pre-boundary sensing snapshot
    pending_sel_.clear();
    for (int i = 0; i < n; ++i) {
        if ((next_period - sps_phase_[i]) % ts != 0) continue;
        if (!rng.bernoulli(cfg_.resel_prob)) continue;
        busy_.clear();
        for (int w = lo_[i]; w <= hi_[i]; ++w) {
            if (w != i) busy_.set(blocks_[w]);
        }
        busy_.set(blocks_[i]); // own block excluded while held
        const int choice = cfg_.policy == Policy::uniform_next_period
                               ? select_uniform(busy_, rng)
                               : select_closest(busy_, phase_[i], cfg_.grid, rng);
        pending_sel_.push_back({i, choice});
    }
    for (const auto& [i, b] : pending_sel_) blocks_[i] = b;
}

inline SimMetrics run_replication(const SimConfig& cfg, int replication_index) {
    Simulation sim(cfg);
    return sim.run(replication_index);
}

} // namespace sps
