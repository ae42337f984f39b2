#include "memhots/time_surface.hpp"

#include <algorithm>
#include <cmath>

namespace memhots {

namespace {

// The single-exponential kernel is the one-pulse restriction of the
// memristor model: unit amplitude on the fast population, no slow
// population. tau2 never contributes (a2 = 0) but must satisfy tau1 < tau2.
ParamDistributions single_exp_dist(double tau_us, double width_us) {
    ParamDistributions d;
    d.mean.a1 = 1.0;
    d.mean.a2 = 0.0;
    d.mean.tau1_us = tau_us;
    d.mean.tau2_us = tau_us * 2.0;
    d.mean.width_us = width_us;
    d.mean.eta_sigma = 0.0;
    return d;
}

} // namespace

MemristorGrid::MemristorGrid(std::uint16_t width, std::uint16_t height, std::uint16_t polarities,
                             ParamDistributions dist, KernelMode mode, ParamSampling sampling)
    : width_(width), height_(height), polarities_(polarities), dist_(std::move(dist)),
      mode_(mode), sampling_(sampling) {
    if (width_ == 0 || height_ == 0 || polarities_ == 0)
        throw data_error("memristor grid: empty dimensions");
    if (mode_.kind == KernelMode::Kind::SingleExp) {
        if (mode_.tau_us <= 0.0) throw data_error("single-exp kernel: tau must be > 0");
        dist_ = single_exp_dist(mode_.tau_us, dist_.mean.width_us);
    }
    if (!dist_.valid()) throw data_error("memristor grid: invalid parameter distribution");
    noise_ = mode_.kind == KernelMode::Kind::MemristorStochastic
                 ? NoiseMode::stochastic(mode_.seed)
                 : NoiseMode::ideal();
    states_.resize(static_cast<std::size_t>(width_) * height_ * polarities_);
    rngs_.resize(states_.size());
    reset(0);
}

void MemristorGrid::reset(std::uint64_t recording_tag) {
    const RngStream base = RngStream(noise_.seed).split(recording_tag);
    for (std::size_t i = 0; i < states_.size(); ++i) {
        states_[i].reset();
        // Seed active params with the mean so read noise applies before the
        // first pulse too.
        states_[i].active = dist_.mean;
        if (noise_.is_stochastic()) rngs_[i] = base.split(i);
    }
}

void MemristorGrid::check_bounds(const Event& ev) const {
    if (ev.x >= width_ || ev.y >= height_ || ev.p >= polarities_)
        throw data_error("event out of grid range: x=" + std::to_string(ev.x) +
                         " y=" + std::to_string(ev.y) + " p=" + std::to_string(ev.p));
}

void MemristorGrid::drive(const Event& ev) {
    check_bounds(ev);
    const std::size_t i = index(ev.x, ev.y, ev.p);
    MemristorState& st = states_[i];
    if (mode_.kind == KernelMode::Kind::SingleExp) {
        // No memory: the kernel restarts from zero baseline at each event.
        st.b1 = 0.0;
        st.b2 = 0.0;
        st.active = dist_.mean;
        st.last_onset_us = ev.t_us;
        st.pulsed = true;
        return;
    }
    if (sampling_ == ParamSampling::PerDevice && st.pulsed) {
        // Keep the params drawn at the first pulse: fold history and move
        // the onset without resampling.
        if (ev.t_us < st.last_onset_us)
            throw data_error("write_pulse: non-monotonic pulse time");
        const DeviceParams p = st.active;
        const double dt = static_cast<double>(ev.t_us - st.last_onset_us);
        if (dt < p.width_us) {
            st.b1 += p.a1 * (dt / p.width_us);
            st.b2 += p.a2 * (dt / p.width_us);
        } else {
            st.b1 = (p.a1 + st.b1) * std::exp(-(dt - p.width_us) / p.tau1_us);
            st.b2 = (p.a2 + st.b2) * std::exp(-(dt - p.width_us) / p.tau2_us);
        }
        st.last_onset_us = ev.t_us;
        return;
    }
    write_pulse(st, ev.t_us, dist_, noise_, rngs_[i], &resample_warnings_);
}

double MemristorGrid::read_device(std::uint16_t x, std::uint16_t y, std::uint16_t p,
                                  double t_us) {
    if (x >= width_ || y >= height_ || p >= polarities_)
        throw data_error("read_device: out of grid range");
    const std::size_t i = index(x, y, p);
    return read_conductance(states_[i], t_us, noise_, rngs_[i]);
}

TimeSurface MemristorGrid::sample_surface(const Event& ev, int radius, SurfaceNorm norm) {
    check_bounds(ev);
    if (radius < 1) throw data_error("sample_surface: radius must be >= 1");
    const MemristorState& center = states_[index(ev.x, ev.y, ev.p)];
    if (!center.pulsed || center.last_onset_us != ev.t_us)
        throw data_error("sample_surface: reference event has not been driven");

    TimeSurface surf;
    surf.center = ev;
    surf.radius = radius;
    const int side = 2 * radius + 1;
    surf.values.assign(static_cast<std::size_t>(side) * side * polarities_, 0.0);

    const double t = static_cast<double>(ev.t_us);
    std::size_t out = 0;
    for (std::uint16_t p = 0; p < polarities_; ++p) {
        for (int dy = -radius; dy <= radius; ++dy) {
            for (int dx = -radius; dx <= radius; ++dx, ++out) {
                const int x = static_cast<int>(ev.x) + dx;
                const int y = static_cast<int>(ev.y) + dy;
                if (x < 0 || y < 0 || x >= width_ || y >= height_) continue;
                const std::size_t i =
                    index(static_cast<std::uint16_t>(x), static_cast<std::uint16_t>(y), p);
                MemristorState& st = states_[i];
                if (dx == 0 && dy == 0 && p == ev.p) {
                    // The just-pulsed reference device reads at its pulse
                    // peak, making the center the maximal cell.
                    surf.values[out] =
                        read_conductance(st, static_cast<double>(st.last_onset_us) +
                                                 st.active.width_us,
                                         noise_, rngs_[i]);
                } else {
                    surf.values[out] = read_conductance(st, t, noise_, rngs_[i]);
                }
            }
        }
    }

    const double max = *std::max_element(surf.values.begin(), surf.values.end());
    if (max <= 1e-9) {
        surf.empty = true;
        return surf;
    }
    double denom = max;
    if (norm == SurfaceNorm::L2) {
        double acc = 0.0;
        for (double v : surf.values) acc += v * v;
        denom = std::sqrt(acc);
    }
    for (double& v : surf.values) v /= denom;
    return surf;
}

} // namespace memhots
