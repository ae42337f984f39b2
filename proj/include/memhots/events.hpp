#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "memhots/errors.hpp"

namespace memhots {

// One address-event: pixel position, polarity channel, timestamp.
struct Event {
    std::int64_t t_us = 0;
    std::uint16_t x = 0;
    std::uint16_t y = 0;
    std::uint16_t p = 0;

    bool operator==(const Event&) const = default;
};

struct Recording {
    std::vector<Event> events; // non-decreasing in t after load
    int label = -1;            // digit class, -1 when unknown
    std::uint16_t width = 34;
    std::uint16_t height = 34;
    std::uint16_t polarity_count = 2;
};

inline constexpr std::uint16_t kNmnistSensorDim = 34;
inline constexpr std::int64_t kNmnistMaxTimestamp = (std::int64_t{1} << 23) - 1;

// N-MNIST AER container: 5 bytes per event. byte0 = x, byte1 = y,
// byte2 bit 7 = polarity, byte2 bits 6..0 + byte3 + byte4 = 23-bit
// timestamp in microseconds. Events are stably sorted by t after decode.
// Throws data_error on truncated records or coordinates >= 34.
Recording decode_nmnist(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_nmnist(const Recording& rec);

Recording load_nmnist_file(const std::string& path);

// Center crop to 28x28 (the paper's stated input resolution): keeps events
// with x, y in [3, 30] and shifts coordinates by -3.
Recording center_crop_28(const Recording& rec);

struct SliceEntry {
    std::string path;
    int label = -1;
};

struct DatasetSlice {
    std::vector<SliceEntry> entries;
    std::string split;
    double fraction = 1.0;
    std::uint64_t seed = 0;
};

// Per-class uniform sample without replacement from a class-per-subdirectory
// tree (<root>/<split>/<digit>/*.bin). Deterministic under seed; class sizes
// are rounded so balance is preserved within one recording.
DatasetSlice sample_slice(const std::string& root, const std::string& split, double fraction,
                          std::uint64_t seed);

struct LoadOptions {
    bool crop28 = false;
};
Recording load_entry(const SliceEntry& entry, const LoadOptions& opts);

// Framed binary cache of decoded recordings (versioned header) for fast
// re-runs.
void write_recording_cache(const std::string& path, const std::vector<Recording>& recs);
std::vector<Recording> read_recording_cache(const std::string& path);

} // namespace memhots
