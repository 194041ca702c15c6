#pragma once

#include "sps/error.hpp"

namespace sps {

// Virtual resource grid of one transmission period. Blocks are grouped into
// subframes; every block of a subframe shares that subframe's time offset.
struct GridShape {
    int n_blocks = 200;
    int blocks_per_subframe = 2;
    double period_ms = 100.0;

    void validate() const {
        if (n_blocks < 1) throw config_error("grid.n_blocks must be >= 1");
        if (blocks_per_subframe < 1)
            throw config_error("grid.blocks_per_subframe must be >= 1");
        if (n_blocks % blocks_per_subframe != 0)
            throw config_error("grid.n_blocks must be divisible by grid.blocks_per_subframe");
        if (!(period_ms > 0.0)) throw config_error("grid.period_ms must be > 0");
    }

    int subframes() const { return n_blocks / blocks_per_subframe; }
    double subframe_ms() const { return period_ms / subframes(); }
    int subframe_of(int block) const { return block / blocks_per_subframe; }
    double offset_ms(int block) const { return subframe_of(block) * subframe_ms(); }
};

} // namespace sps
