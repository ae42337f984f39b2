#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "memhots/errors.hpp"
#include "memhots/rng.hpp"

namespace memhots {

// Conductance model of the Li_xWO3 electrochemical memristor: a WRITE pulse
// of width w raises the channel conductance linearly by two ion populations
// (amplitudes a1, a2), which then relax with independent exponential decays
// (tau1 fast, tau2 slow). Baselines b1/b2 carry the pre-pulse conductance of
// each population into the next pulse (short-term plasticity).
//
// All times are microseconds; conductance is unitless (traces are normalized
// so a single-pulse peak from rest is a1 + a2).

struct DeviceParams {
    double a1 = 0.0;        // fast-population amplitude
    double a2 = 0.0;        // slow-population amplitude
    double tau1_us = 0.0;   // fast decay constant
    double tau2_us = 0.0;   // slow decay constant
    double width_us = 0.0;  // WRITE pulse width w
    double eta_sigma = 0.0; // read-noise std dev

    bool valid() const {
        return tau1_us > 0.0 && tau2_us > 0.0 && tau1_us < tau2_us && width_us > 0.0 &&
               a1 + a2 > 0.0 && eta_sigma >= 0.0;
    }
};

// Per-parameter spread of the fitted estimates (Tables of the device
// characterization). No spread for w: the pulse width is a stimulus setting.
struct ParamStd {
    double a1 = 0.0;
    double a2 = 0.0;
    double tau1_us = 0.0;
    double tau2_us = 0.0;

    bool valid() const { return a1 >= 0.0 && a2 >= 0.0 && tau1_us >= 0.0 && tau2_us >= 0.0; }
};

struct ParamDistributions {
    DeviceParams mean;
    ParamStd std;

    bool valid() const { return mean.valid() && std.valid(); }

    // All spreads (and the read noise) scaled by m; m = 0 collapses the
    // stochastic model onto the deterministic one.
    ParamDistributions scaled_noise(double m) const {
        ParamDistributions d = *this;
        d.std.a1 *= m;
        d.std.a2 *= m;
        d.std.tau1_us *= m;
        d.std.tau2_us *= m;
        d.mean.eta_sigma *= m;
        return d;
    }
};

struct NoiseMode {
    enum class Kind { Ideal, Stochastic };
    Kind kind = Kind::Ideal;
    std::uint64_t seed = 0;

    static NoiseMode ideal() { return {Kind::Ideal, 0}; }
    static NoiseMode stochastic(std::uint64_t seed) { return {Kind::Stochastic, seed}; }
    bool is_stochastic() const { return kind == Kind::Stochastic; }
};

struct MemristorState {
    double b1 = 0.0;
    double b2 = 0.0;
    std::int64_t last_onset_us = 0;
    bool pulsed = false;
    DeviceParams active; // parameters sampled for the most recent pulse

    void reset() { *this = MemristorState{}; }
};

// Gaussian draw of the model parameters. Ideal mode returns the means.
// tau draws are rejected until positive and ordered (tau1 < tau2); after
// 1000 attempts both taus clamp to the means and *resample_warnings is
// incremented. a1/a2 draws are accepted as-is, negative values included.
DeviceParams sample_params(const ParamDistributions& dist, const NoiseMode& mode, RngStream& rng,
                           std::uint64_t* resample_warnings = nullptr);

// Applies a WRITE pulse at t_us: folds the previous pulse's contribution into
// the baselines (evaluated with the previously active parameters), samples
// fresh parameters, and records the onset. Throws data_error on a
// non-monotonic onset.
void write_pulse(MemristorState& state, std::int64_t t_us, const ParamDistributions& dist,
                 const NoiseMode& mode, RngStream& rng, std::uint64_t* resample_warnings = nullptr);

// Deterministic conductance at time t (piecewise linear rise / double
// exponential decay of the active pulse plus baselines). Never mutates state.
double conductance_at(const MemristorState& state, double t_us);

// conductance_at plus one fresh Gaussian read-noise draw in Stochastic mode.
// Readouts are not clipped; negative values are permitted.
double read_conductance(const MemristorState& state, double t_us, const NoiseMode& mode,
                        RngStream& rng);

// Named rows of the fitted-parameter tables (e.g. "1V_200us").
const std::map<std::string, ParamDistributions>& device_presets();
ParamDistributions preset(const std::string& name);
std::vector<std::string> preset_names();

// Human-readable key-value (de)serialization of one distribution block.
std::string to_config_text(const std::string& name, const ParamDistributions& dist);
std::map<std::string, ParamDistributions> parse_config_text(const std::string& text);

} // namespace memhots
