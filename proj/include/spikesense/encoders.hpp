#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "spikesense/channels.hpp"
#include "spikesense/events.hpp"
#include "spikesense/trial.hpp"

namespace spikesense {

// Sensor-to-receptor scaling.  The physical paper behind each receptor model
// fixes the neuron parameters but not the sensor scaling, so these gains are
// artifact choices, validated by the behavioral encoder tests (SA/RA contrast,
// rate sanity) rather than by any published constant.
struct EncoderConfig {
    uint64_t seed = 0;

    double fingertip_force_gain = 3.5;  // (mV/ms) per N, SA drive
    double skin_force_gain = 3.5;
    double fingertip_force_offset = 0.0;
    double skin_force_offset = 0.0;

    // RA force units respond to change, not level: |F| is low-pass filtered
    // (EMA, force_filter_tau_ms) and the RA drive is the magnitude of its
    // time derivative.  Driving RA by sustained |F| would fire it tonically
    // (the RA parameter set has no stable fixed point above ~1 mV/ms drive),
    // which is the opposite of a rapidly-adapting response.
    double force_deriv_gain = 0.5;     // (mV/ms) per (N/s)
    double force_filter_tau_ms = 30.0;

    double accel_gain = 2.0;  // (mV/ms) per (m/s^2), applied to |a - baseline|
    double accel_offset = 0.0;

    double temp_gain = 1.0;  // scales the thermoreceptor tuning-curve output
    double temp_offset = 0.0;

    double spindle_r0_hz = 10.0;   // baseline rate
    double spindle_ks_hz = 150.0;  // Hz per unit L (static, Ia and II)
    double spindle_kd_hz_s = 5.0;  // Hz per unit L/s (dynamic, Ia only)

    void validate() const;
};

// Flat key=value text file, one entry per line; '#' starts a comment.
EncoderConfig load_encoder_config(const std::string& path);
void save_encoder_config(const std::string& path, const EncoderConfig& cfg);

struct SpikeTrain {
    std::vector<uint64_t> times_us;
};

enum class ForceReceptor : uint8_t { SA, RA };

// One force channel -> one receptor train.  `kind` selects the gain set
// (fingertip vs skin); sample rate must match the descriptor table rate for
// that kind.  t0_us shifts all output timestamps (and nothing else).
SpikeTrain encode_force(const std::vector<float>& samples, uint32_t rate_hz,
                        const EncoderConfig& cfg, ChannelKind kind, ForceReceptor which,
                        uint64_t t0_us = 0);

// 3-axis acceleration -> 3 RA trains.  Per-axis baseline is the mean of the
// first 100 ms; fewer samples than that is an error.
std::array<SpikeTrain, 3> encode_acceleration(const std::vector<float>& ax,
                                              const std::vector<float>& ay,
                                              const std::vector<float>& az, uint32_t rate_hz,
                                              const EncoderConfig& cfg, uint64_t t0_us = 0);

// Muscle-spindle Poisson pair: rate_Ia = max(0, r0 + ks*L + kd*Ldot),
// rate_II = max(0, r0 + ks*L); at most one spike per sampling bin, drawn by a
// counter-based generator indexed by bin position within the trial, so a
// time-shifted copy of a trial reproduces the same draws at shifted times.
// stream_seed_* identify the unit (callers derive them from config seed,
// trial seed and unit id).
std::pair<SpikeTrain, SpikeTrain> encode_spindle(const std::vector<float>& L,
                                                 const std::vector<float>& Ldot, uint32_t rate_hz,
                                                 const EncoderConfig& cfg, uint64_t stream_seed_ia,
                                                 uint64_t stream_seed_ii, uint64_t t0_us = 0);

// Temperature channel -> thermoreceptor train (tuning curve into the RA
// model).  Samples outside [-20, 120] degC are rejected.
SpikeTrain encode_temperature(const std::vector<float>& samples, uint32_t rate_hz,
                              const EncoderConfig& cfg, uint64_t t0_us = 0);

// Whole-trial encoder: all channels of the selected modalities -> one merged,
// time-sorted stream over the 111-unit id space.  Equivalent to running the
// per-channel operations above and merging, but batched for speed.
EventStream encode_trial(const SensorTrial& trial, const EncoderConfig& cfg,
                         ModalityMask mask = kAllModalities);

}  // namespace spikesense
