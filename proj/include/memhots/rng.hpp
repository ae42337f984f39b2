#pragma once

#include <cstdint>
#include <cmath>
#include <string_view>

namespace memhots {

// Counter-based splittable random stream (SplitMix64 output function over a
// keyed counter). Every (key, counter) pair maps to one 64-bit output, so
// substreams derived by split() never overlap and draws are reproducible
// independent of thread scheduling.
class RngStream {
public:
    RngStream() : key_(0) {}
    explicit RngStream(std::uint64_t key) : key_(key) {}

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ULL;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t next_u64() { return mix(key_ + 0x632be59bd9b4e019ULL * ++ctr_); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; one value per call, no cached spare,
    // so the draw count per sample is fixed.
    double next_gaussian() {
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; // (0, 1]
        const double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double next_gaussian(double mean, double sigma) { return mean + sigma * next_gaussian(); }

    // Child stream independent of the parent and of siblings with other tags.
    RngStream split(std::uint64_t tag) const { return RngStream(mix(key_ ^ mix(tag))); }

    RngStream split(std::string_view name) const { return split(fnv1a64(name)); }

    static std::uint64_t fnv1a64(std::string_view s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
};

} // namespace memhots
