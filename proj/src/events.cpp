#include "memhots/events.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "memhots/rng.hpp"

namespace fs = std::filesystem;

namespace memhots {

Recording decode_nmnist(std::span<const std::uint8_t> bytes) {
    if (bytes.size() % 5 != 0)
        throw data_error("nmnist decode: byte length " + std::to_string(bytes.size()) +
                         " is not a multiple of 5 (truncated record)");
    Recording rec;
    rec.width = kNmnistSensorDim;
    rec.height = kNmnistSensorDim;
    rec.polarity_count = 2;
    rec.events.reserve(bytes.size() / 5);
    for (std::size_t i = 0; i < bytes.size(); i += 5) {
        Event ev;
        ev.x = bytes[i];
        ev.y = bytes[i + 1];
        ev.p = (bytes[i + 2] >> 7) & 1;
        ev.t_us = (static_cast<std::int64_t>(bytes[i + 2] & 0x7F) << 16) |
                  (static_cast<std::int64_t>(bytes[i + 3]) << 8) |
                  static_cast<std::int64_t>(bytes[i + 4]);
        if (ev.x >= kNmnistSensorDim || ev.y >= kNmnistSensorDim)
            throw data_error("nmnist decode: coordinate out of range at record " +
                             std::to_string(i / 5) + " (x=" + std::to_string(ev.x) +
                             ", y=" + std::to_string(ev.y) + ")");
        rec.events.push_back(ev);
    }
    std::stable_sort(rec.events.begin(), rec.events.end(),
                     [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    return rec;
}

std::vector<std::uint8_t> encode_nmnist(const Recording& rec) {
    std::vector<std::uint8_t> bytes;
    bytes.reserve(rec.events.size() * 5);
    for (const Event& ev : rec.events) {
        if (ev.x >= kNmnistSensorDim || ev.y >= kNmnistSensorDim)
            throw data_error("nmnist encode: coordinate out of range");
        if (ev.p > 1) throw data_error("nmnist encode: polarity does not fit one bit");
        if (ev.t_us < 0 || ev.t_us > kNmnistMaxTimestamp)
            throw data_error("nmnist encode: timestamp " + std::to_string(ev.t_us) +
                             " overflows 23 bits");
        bytes.push_back(static_cast<std::uint8_t>(ev.x));
        bytes.push_back(static_cast<std::uint8_t>(ev.y));
        bytes.push_back(static_cast<std::uint8_t>(((ev.p & 1) << 7) | ((ev.t_us >> 16) & 0x7F)));
        bytes.push_back(static_cast<std::uint8_t>((ev.t_us >> 8) & 0xFF));
        bytes.push_back(static_cast<std::uint8_t>(ev.t_us & 0xFF));
    }
    return bytes;
}

Recording load_nmnist_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open event file: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    try {
        return decode_nmnist(bytes);
    } catch (const data_error& e) {
        throw data_error(path + ": " + e.what());
    }
}

Recording center_crop_28(const Recording& rec) {
    constexpr int kOffset = (34 - 28) / 2;
    Recording out;
    out.label = rec.label;
    out.width = 28;
    out.height = 28;
    out.polarity_count = rec.polarity_count;
    for (const Event& ev : rec.events) {
        if (ev.x < kOffset || ev.x >= kOffset + 28 || ev.y < kOffset || ev.y >= kOffset + 28)
            continue;
        Event c = ev;
        c.x = static_cast<std::uint16_t>(ev.x - kOffset);
        c.y = static_cast<std::uint16_t>(ev.y - kOffset);
        out.events.push_back(c);
    }
    return out;
}

namespace {

fs::path resolve_split_dir(const std::string& root, const std::string& split) {
    // Accept the split name as-is plus the usual capitalizations of the
    // published dataset tree.
    std::string lower = split, cap = split;
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (!cap.empty()) cap[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(cap[0])));
    for (const std::string& name : {split, cap, lower}) {
        fs::path p = fs::path(root) / name;
        if (fs::is_directory(p)) return p;
    }
    throw data_error("dataset: split directory not found under " + root + " for split '" +
                     split + "'");
}

} // namespace

DatasetSlice sample_slice(const std::string& root, const std::string& split, double fraction,
                          std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction <= 1.0))
        throw data_error("sample_slice: fraction must be in (0, 1]");
    const fs::path split_dir = resolve_split_dir(root, split);

    DatasetSlice slice;
    slice.split = split;
    slice.fraction = fraction;
    slice.seed = seed;

    RngStream master(seed);
    for (int label = 0; label <= 9; ++label) {
        const fs::path class_dir = split_dir / std::to_string(label);
        if (!fs::is_directory(class_dir))
            throw data_error("dataset: missing class directory " + class_dir.string());
        std::vector<std::string> files;
        for (const auto& entry : fs::directory_iterator(class_dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".bin")
                files.push_back(entry.path().string());
        }
        if (files.empty()) throw data_error("dataset: no .bin files in " + class_dir.string());
        std::sort(files.begin(), files.end());

        std::size_t take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(files.size())));
        take = std::clamp<std::size_t>(take, 1, files.size());

        RngStream rng = master.split("slice").split(static_cast<std::uint64_t>(label));
        for (std::size_t i = 0; i + 1 < files.size(); ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() %
                                                               (files.size() - i));
            std::swap(files[i], files[j]);
        }
        files.resize(take);
        std::sort(files.begin(), files.end());
        for (const std::string& f : files) slice.entries.push_back({f, label});
    }
    return slice;
}

Recording load_entry(const SliceEntry& entry, const LoadOptions& opts) {
    Recording rec = load_nmnist_file(entry.path);
    rec.label = entry.label;
    if (opts.crop28) rec = center_crop_28(rec);
    return rec;
}

namespace {
constexpr std::uint32_t kCacheMagic = 0x4D484543; // "MHEC"
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw data_error("recording cache: truncated file");
    return v;
}
} // namespace

void write_recording_cache(const std::string& path, const std::vector<Recording>& recs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write recording cache: " + path);
    put(out, kCacheMagic);
    put(out, kCacheVersion);
    put(out, static_cast<std::uint64_t>(recs.size()));
    for (const Recording& r : recs) {
        put(out, static_cast<std::int32_t>(r.label));
        put(out, r.width);
        put(out, r.height);
        put(out, r.polarity_count);
        put(out, static_cast<std::uint64_t>(r.events.size()));
        for (const Event& ev : r.events) {
            put(out, ev.t_us);
            put(out, ev.x);
            put(out, ev.y);
            put(out, ev.p);
        }
    }
}

std::vector<Recording> read_recording_cache(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open recording cache: " + path);
    if (get<std::uint32_t>(in) != kCacheMagic)
        throw data_error("recording cache: bad magic in " + path);
    if (get<std::uint32_t>(in) != kCacheVersion)
        throw data_error("recording cache: unsupported version in " + path);
    const auto count = get<std::uint64_t>(in);
    std::vector<Recording> recs;
    recs.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        Recording r;
        r.label = get<std::int32_t>(in);
        r.width = get<std::uint16_t>(in);
        r.height = get<std::uint16_t>(in);
        r.polarity_count = get<std::uint16_t>(in);
        const auto n = get<std::uint64_t>(in);
        r.events.reserve(n);
        for (std::uint64_t k = 0; k < n; ++k) {
            Event ev;
            ev.t_us = get<std::int64_t>(in);
            ev.x = get<std::uint16_t>(in);
            ev.y = get<std::uint16_t>(in);
            ev.p = get<std::uint16_t>(in);
            r.events.push_back(ev);
        }
        recs.push_back(std::move(r));
    }
    return recs;
}

} // namespace memhots
