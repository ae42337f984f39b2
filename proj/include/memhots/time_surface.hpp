#pragma once

#include <cstdint>
#include <vector>

#include "memhots/device.hpp"
#include "memhots/events.hpp"
#include "memhots/rng.hpp"

namespace memhots {

// Temporal kernel driving each pixel/polarity device.
//  MemristorIdeal      deterministic double-exponential model with STP
//  MemristorStochastic generative model (per-pulse parameter draws + read noise)
//  SingleExp           memoryless single-exponential kernel (the HOTS baseline):
//                      unit amplitude, same pulse width, no baseline carry-over
struct KernelMode {
    enum class Kind { MemristorIdeal, MemristorStochastic, SingleExp };
    Kind kind = Kind::MemristorIdeal;
    std::uint64_t seed = 0;
    double tau_us = 0.0;

    static KernelMode memristor_ideal() { return {Kind::MemristorIdeal, 0, 0.0}; }
    static KernelMode memristor_stochastic(std::uint64_t seed) {
        return {Kind::MemristorStochastic, seed, 0.0};
    }
    static KernelMode single_exp(double tau_us) { return {Kind::SingleExp, 0, tau_us}; }
};

// Per-pulse: fresh parameter draw at every WRITE (default).
// Per-device: one draw per device per recording, reused across pulses.
enum class ParamSampling { PerPulse, PerDevice };

enum class SurfaceNorm { Max, L2 };

struct TimeSurface {
    std::vector<double> values; // (2l+1)^2 per polarity, polarity blocks concatenated
    Event center;
    int radius = 0;
    bool empty = false; // no device in the window carries signal; skip downstream
};

// One simulated device per (pixel, polarity). Grids are single-owner and
// processed in event order; parallelism goes across recordings.
class MemristorGrid {
public:
    MemristorGrid(std::uint16_t width, std::uint16_t height, std::uint16_t polarities,
                  ParamDistributions dist, KernelMode mode,
                  ParamSampling sampling = ParamSampling::PerPulse);

    // Zeroes all devices and re-derives per-device RNG substreams; call at
    // the start of every recording. recording_tag distinguishes substreams
    // across recordings under one master seed.
    void reset(std::uint64_t recording_tag);

    // Treats the event as a WRITE pulse to its device. SingleExp mode just
    // restarts the kernel (no memory).
    void drive(const Event& ev);

    // Samples the conductance of all devices in the (2l+1)-sided window of
    // every polarity at t = ev.t; the reference device itself is read at its
    // pulse peak. Out-of-sensor cells are 0. drive(ev) must already have
    // been applied.
    TimeSurface sample_surface(const Event& ev, int radius, SurfaceNorm norm = SurfaceNorm::Max);

    // Single-device readout (figure dumps, tests).
    double read_device(std::uint16_t x, std::uint16_t y, std::uint16_t p, double t_us);

    std::uint16_t width() const { return width_; }
    std::uint16_t height() const { return height_; }
    std::uint16_t polarities() const { return polarities_; }
    std::uint64_t resample_warnings() const { return resample_warnings_; }

    static std::size_t surface_dim(int radius, std::uint16_t polarities) {
        const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
        return side * side * polarities;
    }

private:
    std::size_t index(std::uint16_t x, std::uint16_t y, std::uint16_t p) const {
        return (static_cast<std::size_t>(y) * width_ + x) * polarities_ + p;
    }
    void check_bounds(const Event& ev) const;

    std::uint16_t width_, height_, polarities_;
    ParamDistributions dist_;
    KernelMode mode_;
    ParamSampling sampling_;
    NoiseMode noise_;
    std::vector<MemristorState> states_;
    std::vector<RngStream> rngs_;
    std::uint64_t resample_warnings_ = 0;
};

} // namespace memhots
