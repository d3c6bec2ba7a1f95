#include "spikesense/trial.hpp"

#include <cmath>
#include <fstream>

#include "spikesense/common.hpp"

namespace spikesense {

void validate_trial(const SensorTrial& trial) {
    const auto& table = channel_table();
    if (trial.channels.size() != static_cast<size_t>(kNumChannels)) {
        std::string missing;
        // Report which descriptor ids are absent (the usual failure mode).
        for (const auto& d : table) {
            bool found = false;
            for (const auto& c : trial.channels)
                if (c.channel_id == d.channel_id) {
                    found = true;
                    break;
                }
            if (!found) missing += strfmt(" %u", d.channel_id);
        }
        throw ValidationError(strfmt("trial has %zu channels, expected %d; missing:%s",
                                     trial.channels.size(), kNumChannels,
                                     missing.empty() ? " (duplicates present)" : missing.c_str()));
    }
    if (trial.duration_us == 0) throw ValidationError("trial duration is zero");
    for (int i = 0; i < kNumChannels; ++i) {
        const auto& c = trial.channels[i];
        const auto& d = table[i];
        if (c.channel_id != d.channel_id)
            throw ValidationError(strfmt("channel at position %d has id %u, expected %u "
                                         "(channels must be stored in id order)",
                                         i, c.channel_id, d.channel_id));
        if (c.rate_hz != d.rate_hz)
            throw ValidationError(strfmt("channel %u rate %u Hz, descriptor says %u Hz",
                                         c.channel_id, c.rate_hz, d.rate_hz));
        uint32_t want = expected_samples(trial.duration_us, d.rate_hz);
        if (c.samples.size() != want)
            throw ValidationError(strfmt("channel %u has %zu samples, expected %u for %.3f s",
                                         c.channel_id, c.samples.size(), want,
                                         trial.duration_us * 1e-6));
        for (float v : c.samples)
            if (!std::isfinite(v))
                throw ValidationError(strfmt("channel %u contains a non-finite sample",
                                             c.channel_id));
    }
    for (int i = 1; i < 4; ++i)
        if (trial.phase_marks_us[i] < trial.phase_marks_us[i - 1])
            throw ValidationError("phase markers out of order");
}

static const uint32_t kTrialMagic = 0x4C525453u;  // "STRL"

void write_trial_file(const std::string& path, const SensorTrial& trial) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    write_u32(os, kTrialMagic);
    write_u32(os, 1u);  // version
    write_u32(os, static_cast<uint32_t>(trial.labels.object_id));
    write_u32(os, static_cast<uint32_t>(trial.labels.pose_id));
    write_u32(os, static_cast<uint32_t>(trial.labels.material_id));
    write_u32(os, trial.labels.trial_index);
    write_u64(os, trial.seed);
    write_u64(os, trial.duration_us);
    for (auto m : trial.phase_marks_us) write_u64(os, m);
    write_u64(os, channel_table_checksum());
    write_u32(os, static_cast<uint32_t>(trial.channels.size()));
    for (const auto& c : trial.channels) {
        write_u32(os, c.channel_id);
        write_u32(os, c.rate_hz);
        write_u32(os, static_cast<uint32_t>(c.samples.size()));
        for (float v : c.samples) write_f32(os, v);
    }
    if (!os) throw ValidationError("write failed: " + path);
}

SensorTrial read_trial_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open: " + path);
    if (read_u32(is, "magic") != kTrialMagic)
        throw ValidationError(path + ": not a trial file (bad magic)");
    uint32_t version = read_u32(is, "version");
    if (version != 1) throw ValidationError(strfmt("%s: unsupported version %u", path.c_str(), version));
    SensorTrial t;
    t.labels.object_id = static_cast<int32_t>(read_u32(is, "object_id"));
    t.labels.pose_id = static_cast<int32_t>(read_u32(is, "pose_id"));
    t.labels.material_id = static_cast<int32_t>(read_u32(is, "material_id"));
    t.labels.trial_index = read_u32(is, "trial_index");
    t.seed = read_u64(is, "seed");
    t.duration_us = read_u64(is, "duration_us");
    for (auto& m : t.phase_marks_us) m = read_u64(is, "phase_mark");
    uint64_t checksum = read_u64(is, "channel_checksum");
    if (checksum != channel_table_checksum())
        throw ValidationError(path + ": channel table checksum mismatch");
    uint32_t n = read_u32(is, "channel_count");
    if (n > 10000) throw ValidationError(path + ": implausible channel count");
    t.channels.resize(n);
    for (auto& c : t.channels) {
        c.channel_id = static_cast<uint16_t>(read_u32(is, "channel_id"));
        c.rate_hz = read_u32(is, "rate_hz");
        uint32_t count = read_u32(is, "sample_count");
        if (count > 100000000u) throw ValidationError(path + ": implausible sample count");
        c.samples.resize(count);
        for (auto& v : c.samples) v = read_f32(is, "sample");
    }
    validate_trial(t);
    return t;
}

void write_trial_csv(const std::string& path, const SensorTrial& trial) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << "channel_id,sample_index,timestamp_us,value\n";
    for (const auto& c : trial.channels)
        for (size_t k = 0; k < c.samples.size(); ++k) {
            uint64_t ts = trial.start_offset_us +
                          static_cast<uint64_t>(std::llround(k * 1e6 / c.rate_hz));
            os << c.channel_id << ',' << k << ',' << ts << ','
               << strfmt("%.9g", c.samples[k]) << '\n';
        }
    if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace spikesense
