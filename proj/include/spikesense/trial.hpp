#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spikesense/channels.hpp"

namespace spikesense {

struct TrialLabels {
    int32_t object_id = -1;    // -1 when not applicable (thermal trials)
    int32_t pose_id = -1;
    int32_t material_id = -1;  // -1 for grasp trials
    uint32_t trial_index = 0;
};

struct ChannelSamples {
    uint16_t channel_id = 0;
    uint32_t rate_hz = 0;
    std::vector<float> samples;
};

// One recorded (here: synthesized) multimodal trial.  Channels are stored in
// channel_id order and must match the descriptor table exactly.
struct SensorTrial {
    TrialLabels labels;
    uint64_t seed = 0;
    uint64_t duration_us = 0;
    uint64_t start_offset_us = 0;  // absolute clock of sample 0 (re-encoding a
                                   // shifted trial reproduces shifted streams)
    // Phase boundaries: approach end, grasp end, lift/hold end, release end.
    std::array<uint64_t, 4> phase_marks_us{};
    std::vector<ChannelSamples> channels;
};

// Expected sample count for a channel over the trial duration.
inline uint32_t expected_samples(uint64_t duration_us, uint32_t rate_hz) {
    return static_cast<uint32_t>((duration_us * rate_hz) / 1000000ull);
}

// Throws ValidationError (listing offending channels) unless the trial matches
// the 78-channel descriptor table in ids, rates and lengths.
void validate_trial(const SensorTrial& trial);

// Trial file IO ("STRL" binary, little-endian) and a CSV mirror for inspection.
void write_trial_file(const std::string& path, const SensorTrial& trial);
SensorTrial read_trial_file(const std::string& path);
void write_trial_csv(const std::string& path, const SensorTrial& trial);

}  // namespace spikesense
