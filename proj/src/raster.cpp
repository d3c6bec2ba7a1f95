#include "spikesense/raster.hpp"

#include <algorithm>
#include <cmath>

#include "spikesense/common.hpp"

namespace spikesense {

SpikeRaster rasterize(const EventStream& stream, ModalityMask mask, double timestep_ms,
                      uint32_t n_steps, uint64_t t0_us) {
    if (timestep_ms <= 0.0 || !std::isfinite(timestep_ms))
        throw ValidationError("rasterize: timestep must be positive");
    if (n_steps == 0) throw ValidationError("rasterize: zero-step horizon");

    std::vector<int32_t> row_of(kNumUnits, -1);
    std::vector<uint16_t> rows = units_in_mask(mask);
    for (size_t i = 0; i < rows.size(); ++i) row_of[rows[i]] = static_cast<int32_t>(i);

    SpikeRaster r;
    r.n_units = static_cast<uint32_t>(rows.size());
    r.n_steps = n_steps;
    r.timestep_ms = timestep_ms;

    const double step_us = timestep_ms * 1000.0;
    // (row, step) pairs, then sort + dedup; streams are time-sorted but the
    // raster is keyed by row first.
    for (const auto& e : stream.events) {
        if (e.unit_id >= kNumUnits)
            throw ValidationError(strfmt("rasterize: unit id %u outside the %d-unit table",
                                         e.unit_id, kNumUnits));
        int32_t row = row_of[e.unit_id];
        if (row < 0) continue;  // excluded modality
        if (e.timestamp_us < t0_us) {
            ++r.truncated;
            continue;
        }
        auto step = static_cast<uint64_t>((e.timestamp_us - t0_us) / step_us);
        if (step >= n_steps) {
            ++r.truncated;
            continue;
        }
        r.spikes.emplace_back(static_cast<uint32_t>(row), static_cast<uint32_t>(step));
    }
    std::sort(r.spikes.begin(), r.spikes.end());
    auto last = std::unique(r.spikes.begin(), r.spikes.end());
    r.collapsed = static_cast<uint64_t>(r.spikes.end() - last);
    r.spikes.erase(last, r.spikes.end());
    return r;
}

Eigen::MatrixXf raster_dense(const SpikeRaster& r) {
    Eigen::MatrixXf m = Eigen::MatrixXf::Zero(r.n_units, r.n_steps);
    for (const auto& [row, step] : r.spikes) m(row, step) = 1.0f;
    return m;
}

}  // namespace spikesense
