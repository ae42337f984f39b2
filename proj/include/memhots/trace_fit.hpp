#pragma once

#include <string>
#include <vector>

#include "memhots/device.hpp"
#include "memhots/errors.hpp"

namespace memhots {

// One single-pulse relaxation recording. Samples are (t, g) pairs at the
// instrument rate (~6 ms); the pulse itself is sub-millisecond so only the
// decay tail carries the parameter information.
struct Trace {
    std::vector<double> t_us;
    std::vector<double> g;
    double onset_us = 0.0;
    double width_us = 0.0;

    std::size_t size() const { return t_us.size(); }
    void validate() const;
};

struct FitResult {
    DeviceParams params;
    double rmse = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Mean baseline-corrected peak over a recording group; the normalization
// reference shared by all traces of the group.
double group_peak_reference(const std::vector<Trace>& group);

// Subtracts the pre-onset mean and divides by peak_reference so a
// single-pulse peak from rest maps to ~1.
Trace normalize_trace(const Trace& raw, double peak_reference);

// Gauss-Newton fit of g(t) = A1 exp(-(t-t0-w)/tau1) + A2 exp(-(t-t0-w)/tau2)
// over the post-pulse samples (t >= t0 + w). Analytic Jacobian, step-halving
// line search, amplitudes/taus reordered so tau1 < tau2 on return. Throws
// convergence_error on singular normal equations; a fit that runs out of
// iterations returns converged = false.
FitResult fit_decay(const Trace& trace);

// Tables-style aggregate of a recording group: per-parameter mean and
// sample standard deviation, plus the mean rmse (the eta of the tables).
struct FitSummary {
    DeviceParams mean;
    ParamStd std;
    double eta_mean = 0.0;
    std::size_t count = 0;
};
FitSummary summarize_fits(const std::vector<FitResult>& fits);

// CSV with header "t_us,g".
Trace read_trace_csv(const std::string& path, double onset_us, double width_us);

} // namespace memhots
