#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spikesense {

struct SpikeEvent {
    uint64_t timestamp_us;
    uint16_t unit_id;
};

inline bool operator<(const SpikeEvent& a, const SpikeEvent& b) {
    return a.timestamp_us != b.timestamp_us ? a.timestamp_us < b.timestamp_us
                                            : a.unit_id < b.unit_id;
}
inline bool operator==(const SpikeEvent& a, const SpikeEvent& b) {
    return a.timestamp_us == b.timestamp_us && a.unit_id == b.unit_id;
}

// Sorted sparse spike record (address-event representation).
struct EventStream {
    uint32_t unit_count = 0;  // size of the unit id space, not distinct ids present
    std::vector<SpikeEvent> events;
};

// Binary .spk format: 16-byte header (magic "SPKE", version u32 = 1,
// unit_count u32, record_count u32), then per event: timestamp_us u64,
// unit_id u16, reserved u16 = 0.  Little-endian throughout.
void write_event_stream(const std::string& path, const EventStream& stream);
EventStream read_event_stream(const std::string& path);

// CSV twin: header `timestamp_us,unit_id`, one row per event.
void write_event_csv(const std::string& path, const EventStream& stream);

}  // namespace spikesense
