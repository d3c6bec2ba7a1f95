#include "spikesense/events.hpp"

#include <algorithm>
#include <fstream>

#include "spikesense/common.hpp"

namespace spikesense {

static const uint32_t kSpkMagic = 0x454B5053u;  // "SPKE"

void write_event_stream(const std::string& path, const EventStream& stream) {
    if (!std::is_sorted(stream.events.begin(), stream.events.end()))
        throw ValidationError("event stream not sorted; refusing to write " + path);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    write_u32(os, kSpkMagic);
    write_u32(os, 1u);
    write_u32(os, stream.unit_count);
    write_u32(os, static_cast<uint32_t>(stream.events.size()));
    for (const auto& e : stream.events) {
        write_u64(os, e.timestamp_us);
        write_u16(os, e.unit_id);
        write_u16(os, 0);
    }
    if (!os) throw ValidationError("write failed: " + path);
}

EventStream read_event_stream(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open: " + path);
    if (read_u32(is, "magic") != kSpkMagic)
        throw ValidationError(path + ": not an event stream (bad magic)");
    uint32_t version = read_u32(is, "version");
    if (version != 1)
        throw ValidationError(strfmt("%s: unsupported version %u", path.c_str(), version));
    EventStream s;
    s.unit_count = read_u32(is, "unit_count");
    uint32_t n = read_u32(is, "record_count");
    s.events.resize(n);
    for (auto& e : s.events) {
        e.timestamp_us = read_u64(is, "timestamp");
        e.unit_id = read_u16(is, "unit_id");
        uint16_t reserved = read_u16(is, "reserved");
        if (reserved != 0)
            throw ValidationError(path + ": nonzero reserved field (corrupt record?)");
        if (e.unit_id >= s.unit_count)
            throw ValidationError(strfmt("%s: unit id %u out of range (unit_count %u)",
                                         path.c_str(), e.unit_id, s.unit_count));
    }
    if (!std::is_sorted(s.events.begin(), s.events.end()))
        throw ValidationError(path + ": events out of order");
    return s;
}

void write_event_csv(const std::string& path, const EventStream& stream) {
    std::ofstream os(path);
    if (!os) throw ValidationError("cannot open for writing: " + path);
    os << "timestamp_us,unit_id\n";
    for (const auto& e : stream.events) os << e.timestamp_us << ',' << e.unit_id << '\n';
    if (!os) throw ValidationError("write failed: " + path);
}

}  // namespace spikesense
