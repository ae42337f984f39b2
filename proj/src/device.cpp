#include "memhots/device.hpp"

#include <cmath>
#include <sstream>

namespace memhots {

DeviceParams sample_params(const ParamDistributions& dist, const NoiseMode& mode, RngStream& rng,
                           std::uint64_t* resample_warnings) {
    if (!dist.valid()) throw data_error("sample_params: invalid parameter distribution");
    if (!mode.is_stochastic()) return dist.mean;

    DeviceParams p = dist.mean;
    p.a1 = rng.next_gaussian(dist.mean.a1, dist.std.a1);
    p.a2 = rng.next_gaussian(dist.mean.a2, dist.std.a2);

    bool ok = false;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        p.tau1_us = rng.next_gaussian(dist.mean.tau1_us, dist.std.tau1_us);
        p.tau2_us = rng.next_gaussian(dist.mean.tau2_us, dist.std.tau2_us);
        if (p.tau1_us > 0.0 && p.tau2_us > 0.0 && p.tau1_us < p.tau2_us) {
            ok = true;
            break;
        }
    }
    if (!ok) {
        p.tau1_us = dist.mean.tau1_us;
        p.tau2_us = dist.mean.tau2_us;
        if (resample_warnings) ++*resample_warnings;
    }
    return p;
}

namespace {

// Per-population conductance of the active pulse at elapsed time dt >= 0.
// Rise phase (dt < w): linear fill on top of the stored baseline.
// Decay phase: exponential relaxation of amplitude-plus-baseline.
inline double population_value(double amplitude, double baseline, double dt, double w, double tau) {
    if (dt < w) return amplitude * (dt / w) + baseline;
    return (amplitude + baseline) * std::exp(-(dt - w) / tau);
}

} // namespace

void write_pulse(MemristorState& state, std::int64_t t_us, const ParamDistributions& dist,
                 const NoiseMode& mode, RngStream& rng, std::uint64_t* resample_warnings) {
    if (state.pulsed) {
        if (t_us < state.last_onset_us)
            throw data_error("write_pulse: non-monotonic pulse time (" + std::to_string(t_us) +
                             " < " + std::to_string(state.last_onset_us) + ")");
        const double dt = static_cast<double>(t_us - state.last_onset_us);
        const DeviceParams& p = state.active;
        state.b1 = population_value(p.a1, state.b1, dt, p.width_us, p.tau1_us);
        state.b2 = population_value(p.a2, state.b2, dt, p.width_us, p.tau2_us);
    } else {
        state.b1 = 0.0;
        state.b2 = 0.0;
    }
    state.active = sample_params(dist, mode, rng, resample_warnings);
    state.last_onset_us = t_us;
    state.pulsed = true;
}

double conductance_at(const MemristorState& state, double t_us) {
    if (!state.pulsed) return 0.0;
    const double dt = t_us - static_cast<double>(state.last_onset_us);
    if (dt < 0.0) throw data_error("conductance_at: read before last pulse onset");
    const DeviceParams& p = state.active;
    return population_value(p.a1, state.b1, dt, p.width_us, p.tau1_us) +
           population_value(p.a2, state.b2, dt, p.width_us, p.tau2_us);
}

double read_conductance(const MemristorState& state, double t_us, const NoiseMode& mode,
                        RngStream& rng) {
    double g = conductance_at(state, t_us);
    if (mode.is_stochastic()) {
        // Read noise applies to every readout, never-pulsed devices included
        // (grids seed active params with the distribution mean at reset so
        // eta_sigma is set before the first pulse).
        g += rng.next_gaussian(0.0, state.active.eta_sigma);
    }
    return g;
}

namespace {

ParamDistributions make_dist(double a1, double sa1, double tau1_ms, double stau1_ms, double a2,
                             double sa2, double tau2_ms, double stau2_ms, double w_us,
                             double eta) {
    ParamDistributions d;
    d.mean.a1 = a1;
    d.mean.a2 = a2;
    d.mean.tau1_us = tau1_ms * 1000.0;
    d.mean.tau2_us = tau2_ms * 1000.0;
    d.mean.width_us = w_us;
    d.mean.eta_sigma = eta;
    d.std.a1 = sa1;
    d.std.a2 = sa2;
    d.std.tau1_us = stau1_ms * 1000.0;
    d.std.tau2_us = stau2_ms * 1000.0;
    return d;
}

} // namespace

const std::map<std::string, ParamDistributions>& device_presets() {
    static const std::map<std::string, ParamDistributions> presets = {
        // fixed 1V amplitude, varying pulse width
        {"1V_200us", make_dist(0.57, 0.27, 5, 2, 0.50, 0.05, 92, 18, 200, 0.11)},
        {"1V_500us", make_dist(0.74, 0.18, 16, 9, 0.26, 0.06, 588, 31, 500, 0.12)},
        {"1V_750us", make_dist(0.78, 0.19, 10, 2, 0.23, 0.03, 513, 98, 750, 0.04)},
        {"1V_1ms", make_dist(0.75, 0.29, 10, 3, 0.22, 0.02, 390, 68, 1000, 0.02)},
        // fixed 200us width, varying pulse amplitude (1V row shared above)
        {"2V_200us", make_dist(0.54, 0.29, 7, 1, 0.35, 0.02, 122, 20, 200, 0.06)},
        {"3V_200us", make_dist(0.77, 0.24, 13, 6, 0.23, 0.02, 373, 98, 200, 0.07)},
        {"4V_200us", make_dist(0.75, 0.17, 11, 3, 0.25, 0.01, 501, 101, 200, 0.05)},
    };
    return presets;
}

ParamDistributions preset(const std::string& name) {
    const auto& p = device_presets();
    auto it = p.find(name);
    if (it == p.end()) {
        std::string names;
        for (const auto& [n, _] : p) names += (names.empty() ? "" : ", ") + n;
        throw data_error("unknown device preset '" + name + "' (available: " + names + ")");
    }
    return it->second;
}

std::vector<std::string> preset_names() {
    std::vector<std::string> names;
    for (const auto& [n, _] : device_presets()) names.push_back(n);
    return names;
}

std::string to_config_text(const std::string& name, const ParamDistributions& d) {
    std::ostringstream os;
    os.precision(17);
    os << "[" << name << "]\n";
    os << "a1 = " << d.mean.a1 << "\n";
    os << "a1_std = " << d.std.a1 << "\n";
    os << "a2 = " << d.mean.a2 << "\n";
    os << "a2_std = " << d.std.a2 << "\n";
    os << "tau1_us = " << d.mean.tau1_us << "\n";
    os << "tau1_std_us = " << d.std.tau1_us << "\n";
    os << "tau2_us = " << d.mean.tau2_us << "\n";
    os << "tau2_std_us = " << d.std.tau2_us << "\n";
    os << "width_us = " << d.mean.width_us << "\n";
    os << "eta_sigma = " << d.mean.eta_sigma << "\n";
    return os.str();
}

std::map<std::string, ParamDistributions> parse_config_text(const std::string& text) {
    std::map<std::string, ParamDistributions> out;
    std::istringstream is(text);
    std::string line, section;
    ParamDistributions cur;
    auto flush = [&]() {
        if (!section.empty()) {
            if (!cur.valid())
                throw data_error("device config: invalid parameters in section [" + section + "]");
            out[section] = cur;
        }
    };
    while (std::getline(is, line)) {
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[' && line.back() == ']') {
            flush();
            section = line.substr(1, line.size() - 2);
            cur = ParamDistributions{};
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos || section.empty())
            throw data_error("device config: malformed line '" + line + "'");
        std::string key = line.substr(0, eq);
        key.erase(key.find_last_not_of(" \t") + 1);
        double value = 0.0;
        try {
            value = std::stod(line.substr(eq + 1));
        } catch (const std::exception&) {
            throw data_error("device config: bad number in line '" + line + "'");
        }
        if (key == "a1") cur.mean.a1 = value;
        else if (key == "a1_std") cur.std.a1 = value;
        else if (key == "a2") cur.mean.a2 = value;
        else if (key == "a2_std") cur.std.a2 = value;
        else if (key == "tau1_us") cur.mean.tau1_us = value;
        else if (key == "tau1_std_us") cur.std.tau1_us = value;
        else if (key == "tau2_us") cur.mean.tau2_us = value;
        else if (key == "tau2_std_us") cur.std.tau2_us = value;
        else if (key == "width_us") cur.mean.width_us = value;
        else if (key == "eta_sigma") cur.mean.eta_sigma = value;
        else throw data_error("device config: unknown key '" + key + "'");
    }
    flush();
    return out;
}

} // namespace memhots
