#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spikesense/common.hpp"

namespace spikesense {

// Fixed inventory of the sensorized hand: 78 physical channels feeding 111
// receptor units.  Everything downstream (trial files, event streams, rasters)
// indexes into these two tables, so they are the single source of truth.

enum class ChannelKind : uint8_t {
    FingertipForce,    // 4 fingertip sensors x 3 axes, 350 Hz
    SkinForce,         // 21 skin cells, normal force, 250 Hz
    SkinAcceleration,  // 7 skin sites x 3 axes, 250 Hz
    SkinTemperature,   // 14 skin cells, 250 Hz
    Stretch,           // 5 stretch sensors x (L, Ldot), 150 Hz
};

struct ChannelDescriptor {
    uint16_t channel_id;
    ChannelKind kind;
    uint16_t body_site;  // finger / palm-cell index within the kind
    char axis;           // 'x','y','z' | 'n' normal | 'L' length | 'V' length rate | '-'
    uint32_t rate_hz;
};

inline constexpr int kNumChannels = 78;
inline constexpr int kNumUnits = 111;

inline constexpr int kFingertipForceCh0 = 0;   // 12 channels
inline constexpr int kSkinForceCh0 = 12;       // 21
inline constexpr int kSkinAccelCh0 = 33;       // 21
inline constexpr int kSkinTempCh0 = 54;        // 14
inline constexpr int kStretchCh0 = 68;         // 10

inline const std::array<ChannelDescriptor, kNumChannels>& channel_table() {
    static const auto table = [] {
        std::array<ChannelDescriptor, kNumChannels> t{};
        int id = 0;
        const char axes[3] = {'x', 'y', 'z'};
        for (uint16_t s = 0; s < 4; ++s)
            for (int a = 0; a < 3; ++a)
                t[id] = {static_cast<uint16_t>(id), ChannelKind::FingertipForce, s, axes[a], 350},
                ++id;
        for (uint16_t s = 0; s < 21; ++s)
            t[id] = {static_cast<uint16_t>(id), ChannelKind::SkinForce, s, 'n', 250}, ++id;
        for (uint16_t s = 0; s < 7; ++s)
            for (int a = 0; a < 3; ++a)
                t[id] = {static_cast<uint16_t>(id), ChannelKind::SkinAcceleration, s, axes[a], 250},
                ++id;
        for (uint16_t s = 0; s < 14; ++s)
            t[id] = {static_cast<uint16_t>(id), ChannelKind::SkinTemperature, s, '-', 250}, ++id;
        for (uint16_t s = 0; s < 5; ++s) {
            t[id] = {static_cast<uint16_t>(id), ChannelKind::Stretch, s, 'L', 150}, ++id;
            t[id] = {static_cast<uint16_t>(id), ChannelKind::Stretch, s, 'V', 150}, ++id;
        }
        return t;
    }();
    return table;
}

// Checksum over the descriptor table, embedded in trial files so a stale file
// can't be decoded against a different inventory.
inline uint64_t channel_table_checksum() {
    uint64_t h = 0x5354524Cu;  // arbitrary start
    for (const auto& c : channel_table())
        h = mix64(h ^ hash_seq({c.channel_id, static_cast<uint64_t>(c.kind), c.body_site,
                                static_cast<uint64_t>(c.axis), c.rate_hz}));
    return h;
}

// --- receptor units -----------------------------------------------------------

enum class UnitKind : uint8_t { ForceSA, ForceRA, AccelRA, Thermo, SpindleIa, SpindleII };

struct UnitDescriptor {
    uint16_t unit_id;
    uint16_t channel_id;  // for spindles: the L channel of the sensor
    UnitKind kind;
};

inline constexpr int kForceUnit0 = 0;      // SA/RA interleaved per force channel, 0..65
inline constexpr int kAccelUnit0 = 66;     // 66..86
inline constexpr int kThermoUnit0 = 87;    // 87..100
inline constexpr int kSpindleUnit0 = 101;  // Ia/II interleaved per sensor, 101..110

inline const std::array<UnitDescriptor, kNumUnits>& unit_table() {
    static const auto table = [] {
        std::array<UnitDescriptor, kNumUnits> t{};
        int id = 0;
        for (uint16_t ch = 0; ch < 33; ++ch) {  // 12 fingertip + 21 skin force channels
            t[id] = {static_cast<uint16_t>(id), ch, UnitKind::ForceSA}, ++id;
            t[id] = {static_cast<uint16_t>(id), ch, UnitKind::ForceRA}, ++id;
        }
        for (uint16_t ch = kSkinAccelCh0; ch < kSkinAccelCh0 + 21; ++ch)
            t[id] = {static_cast<uint16_t>(id), ch, UnitKind::AccelRA}, ++id;
        for (uint16_t ch = kSkinTempCh0; ch < kSkinTempCh0 + 14; ++ch)
            t[id] = {static_cast<uint16_t>(id), ch, UnitKind::Thermo}, ++id;
        for (uint16_t s = 0; s < 5; ++s) {
            uint16_t lch = static_cast<uint16_t>(kStretchCh0 + 2 * s);
            t[id] = {static_cast<uint16_t>(id), lch, UnitKind::SpindleIa}, ++id;
            t[id] = {static_cast<uint16_t>(id), lch, UnitKind::SpindleII}, ++id;
        }
        return t;
    }();
    return table;
}

// --- modalities ----------------------------------------------------------------

enum class Modality : uint8_t {
    FingertipForce = 0,
    SkinForce = 1,
    Acceleration = 2,
    Proprioception = 3,
    Temperature = 4,
};

using ModalityMask = uint8_t;  // bit i = Modality i

inline constexpr ModalityMask kAllModalities = 0x1F;
// The grasp classifier omits temperature (ambient-dependent); this is the
// default mask for encode/train/eval.
inline constexpr ModalityMask kGraspModalities = 0x0F;

inline ModalityMask modality_bit(Modality m) {
    return static_cast<ModalityMask>(1u << static_cast<uint8_t>(m));
}

inline bool mask_has(ModalityMask mask, Modality m) { return (mask & modality_bit(m)) != 0; }

inline const char* modality_name(Modality m) {
    switch (m) {
        case Modality::FingertipForce: return "fingertip-force";
        case Modality::SkinForce: return "skin-force";
        case Modality::Acceleration: return "acceleration";
        case Modality::Proprioception: return "proprioception";
        case Modality::Temperature: return "temperature";
    }
    return "?";
}

inline Modality modality_from_name(const std::string& s) {
    for (int i = 0; i < 5; ++i) {
        Modality m = static_cast<Modality>(i);
        if (s == modality_name(m)) return m;
    }
    throw ValidationError("unknown modality '" + s +
                          "' (expected fingertip-force, skin-force, acceleration, "
                          "proprioception or temperature)");
}

// Comma-separated list -> mask; "all" selects every modality.
inline ModalityMask parse_modalities(const std::string& csv) {
    if (csv == "all") return kAllModalities;
    ModalityMask mask = 0;
    std::string cur;
    for (size_t i = 0; i <= csv.size(); ++i) {
        if (i == csv.size() || csv[i] == ',') {
            if (!cur.empty()) mask |= modality_bit(modality_from_name(cur));
            cur.clear();
        } else {
            cur.push_back(csv[i]);
        }
    }
    if (mask == 0) throw ValidationError("empty modality list");
    return mask;
}

inline std::string modalities_to_string(ModalityMask mask) {
    std::string out;
    for (int i = 0; i < 5; ++i)
        if (mask & (1u << i)) {
            if (!out.empty()) out += ',';
            out += modality_name(static_cast<Modality>(i));
        }
    return out;
}

inline Modality channel_modality(ChannelKind k) {
    switch (k) {
        case ChannelKind::FingertipForce: return Modality::FingertipForce;
        case ChannelKind::SkinForce: return Modality::SkinForce;
        case ChannelKind::SkinAcceleration: return Modality::Acceleration;
        case ChannelKind::SkinTemperature: return Modality::Temperature;
        case ChannelKind::Stretch: return Modality::Proprioception;
    }
    return Modality::FingertipForce;
}

inline Modality unit_modality(uint16_t unit_id) {
    const auto& u = unit_table()[unit_id];
    return channel_modality(channel_table()[u.channel_id].kind);
}

// Unit ids selected by a mask, ascending.
inline std::vector<uint16_t> units_in_mask(ModalityMask mask) {
    std::vector<uint16_t> ids;
    for (const auto& u : unit_table())
        if (mask_has(mask, unit_modality(u.unit_id))) ids.push_back(u.unit_id);
    return ids;
}

}  // namespace spikesense
