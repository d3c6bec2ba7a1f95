#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "spikesense/channels.hpp"
#include "spikesense/events.hpp"

namespace spikesense {

// Binary (units x T) spike matrix at the network timestep, stored sparse:
// most bins are empty, and training densifies one batch at a time anyway.
// Rows follow units_in_mask(mask) order, so the raster of a masked stream is
// dense in its own row space (no silent padding rows for excluded units).
struct SpikeRaster {
    uint32_t n_units = 0;
    uint32_t n_steps = 0;
    double timestep_ms = 2.0;
    std::vector<std::pair<uint32_t, uint32_t>> spikes;  // (row, step), sorted
    uint64_t collapsed = 0;  // extra events that landed in an occupied bin
    uint64_t truncated = 0;  // events at/after the horizon, dropped
};

// Bin b takes a 1 iff the unit emitted >= 1 event in [b dt, (b+1) dt), with
// timestamps taken relative to the first covered step (events before
// t0_us bin to step 0 only if they land there; callers pass the stream's own
// origin). Events beyond n_steps are counted in `truncated`, duplicates per
// bin in `collapsed`.
SpikeRaster rasterize(const EventStream& stream, ModalityMask mask, double timestep_ms,
                      uint32_t n_steps, uint64_t t0_us = 0);

// Dense column-per-step view used by tests and single-trial inference.
Eigen::MatrixXf raster_dense(const SpikeRaster& r);

}  // namespace spikesense
