#include "memhots/trace_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace memhots {

void Trace::validate() const {
    if (t_us.size() != g.size()) throw data_error("trace: t/g length mismatch");
    for (std::size_t i = 1; i < t_us.size(); ++i)
        if (t_us[i] <= t_us[i - 1]) throw data_error("trace: timestamps not strictly increasing");
    std::size_t post = 0;
    for (double t : t_us)
        if (t >= onset_us + width_us) ++post;
    if (post < 8) throw data_error("trace: fewer than 8 samples after the pulse");
}

namespace {

double pre_onset_mean(const Trace& tr) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < tr.size(); ++i) {
        if (tr.t_us[i] < tr.onset_us) {
            sum += tr.g[i];
            ++n;
        }
    }
    if (n == 0) throw data_error("trace: no pre-onset samples to estimate the baseline");
    return sum / static_cast<double>(n);
}

// Least-squares line ln(y) = b + m*s over points with y > 0. Returns false
// when fewer than two usable points remain.
bool log_linear_fit(const std::vector<double>& s, const std::vector<double>& y, double* slope,
                    double* intercept) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] <= 1e-12) continue;
        const double ly = std::log(y[i]);
        sx += s[i];
        sy += ly;
        sxx += s[i] * s[i];
        sxy += s[i] * ly;
        ++n;
    }
    if (n < 2) return false;
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) return false;
    *slope = (n * sxy - sx * sy) / denom;
    *intercept = (sy - *slope * sx) / n;
    return true;
}

struct DecayData {
    std::vector<double> s;   // elapsed time past the pulse end
    std::vector<double> y;   // conductance
};

using Params4 = std::array<double, 4>; // a1, a2, tau1, tau2

// Sanity box for the line search: taus resolvable within the observed
// window, amplitudes bounded by a small multiple of the normalized peak.
// Steps outside are treated as non-decreasing and halved.
bool in_box(const DecayData& d, const Params4& p) {
    const double span = d.s.back() > 0.0 ? d.s.back() : 1.0;
    const double y_max = *std::max_element(d.y.begin(), d.y.end());
    const double a_cap = 5.0 * std::max(y_max, 1.0);
    return p[2] > 0.0 && p[3] > 0.0 && p[2] <= 20.0 * span && p[3] <= 20.0 * span &&
           std::abs(p[0]) <= a_cap && std::abs(p[1]) <= a_cap;
}

double ssr(const DecayData& d, const Params4& p) {
    if (!in_box(d, p)) return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t k = 0; k < d.s.size(); ++k) {
        const double f = p[0] * std::exp(-d.s[k] / p[2]) + p[1] * std::exp(-d.s[k] / p[3]);
        const double r = d.y[k] - f;
        acc += r * r;
    }
    return acc;
}

// Solve the 4x4 normal equations by LU with partial pivoting. Throws on a
// numerically rank-deficient system.
Params4 solve_normal_equations(std::array<std::array<double, 4>, 4> m, Params4 rhs) {
    double scale = 0.0;
    for (const auto& row : m)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) throw convergence_error("fit_decay: normal equations are singular");
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
        if (std::abs(m[pivot][col]) < 1e-13 * scale)
            throw convergence_error("fit_decay: normal equations are rank-deficient");
        std::swap(m[col], m[pivot]);
        std::swap(rhs[col], rhs[pivot]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = m[r][col] / m[col][col];
            for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    Params4 x{};
    for (int r = 3; r >= 0; --r) {
        double acc = rhs[r];
        for (int c = r + 1; c < 4; ++c) acc -= m[r][c] * x[c];
        x[r] = acc / m[r][r];
    }
    return x;
}

// Peeling initialization: the slow component from the trailing third, the
// fast one from the leading third after removing the slow estimate. The
// log-linear fits only see samples above a noise floor, otherwise the
// sign-flipping tail of a noisy recording wrecks the slope.
Params4 initial_guess(const DecayData& d) {
    const double g0 = d.y.front();
    const double span = d.s.back() - d.s.front();

    std::vector<std::size_t> usable;
    const double y_max = *std::max_element(d.y.begin(), d.y.end());
    const double floor = std::max(1e-12, 0.03 * y_max);
    for (std::size_t k = 0; k < d.y.size(); ++k)
        if (d.y[k] > floor) usable.push_back(k);

    double tau2 = span > 0.0 ? span / 2.0 : 1.0;
    double a2_lf = std::max(g0 / 2.0, 1e-6);
    if (usable.size() >= 6) {
        std::vector<double> s, y;
        for (std::size_t i = 2 * usable.size() / 3; i < usable.size(); ++i) {
            s.push_back(d.s[usable[i]]);
            y.push_back(d.y[usable[i]]);
        }
        double slope, intercept;
        if (log_linear_fit(s, y, &slope, &intercept) && slope < 0.0) {
            tau2 = -1.0 / slope;
            a2_lf = std::exp(intercept);
        }
    }

    double tau1 = tau2 / 10.0;
    if (!usable.empty()) {
        std::vector<double> s, r;
        for (std::size_t i = 0; i < std::max<std::size_t>(usable.size() / 3, 3) &&
                                i < usable.size();
             ++i) {
            const std::size_t k = usable[i];
            s.push_back(d.s[k]);
            r.push_back(d.y[k] - a2_lf * std::exp(-d.s[k] / tau2));
        }
        double slope, intercept;
        if (log_linear_fit(s, r, &slope, &intercept) && slope < 0.0) tau1 = -1.0 / slope;
    }
    tau1 = std::clamp(tau1, 1e-9, 0.9 * tau2);
    return {g0 / 2.0, g0 / 2.0, tau1, tau2};
}

} // namespace

double group_peak_reference(const std::vector<Trace>& group) {
    if (group.empty()) throw data_error("peak reference: empty recording group");
    double acc = 0.0;
    for (const Trace& tr : group) {
        const double base = pre_onset_mean(tr);
        acc += *std::max_element(tr.g.begin(), tr.g.end()) - base;
    }
    return acc / static_cast<double>(group.size());
}

Trace normalize_trace(const Trace& raw, double peak_reference) {
    if (peak_reference <= 0.0) throw data_error("normalize_trace: peak reference must be > 0");
    const double base = pre_onset_mean(raw);
    Trace out = raw;
    for (double& v : out.g) v = (v - base) / peak_reference;
    return out;
}

namespace {

struct GnOutcome {
    Params4 p{};
    double ssr = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
};

GnOutcome gauss_newton(const DecayData& d, Params4 p) {
    double cur_ssr = ssr(d, p);
    const std::size_t n = d.s.size();

    GnOutcome res;
    constexpr int kMaxIter = 200;
    constexpr double kStepTol = 1e-10;
    for (int it = 1; it <= kMaxIter; ++it) {
        res.iterations = it;

        std::array<std::array<double, 4>, 4> jtj{};
        Params4 jtr{};
        for (std::size_t k = 0; k < n; ++k) {
            const double e1 = std::exp(-d.s[k] / p[2]);
            const double e2 = std::exp(-d.s[k] / p[3]);
            const double r = d.y[k] - (p[0] * e1 + p[1] * e2);
            const Params4 j = {e1, e2, p[0] * e1 * d.s[k] / (p[2] * p[2]),
                               p[1] * e2 * d.s[k] / (p[3] * p[3])};
            for (int a = 0; a < 4; ++a) {
                jtr[a] += j[a] * r;
                for (int b = 0; b < 4; ++b) jtj[a][b] += j[a] * j[b];
            }
        }
        // Column equilibration: amplitude and tau columns differ by orders
        // of magnitude (taus are in microseconds), which would otherwise
        // dominate the pivot tolerance. Identical GN step in exact
        // arithmetic.
        Params4 col_scale{};
        for (int a = 0; a < 4; ++a) {
            col_scale[a] = std::sqrt(jtj[a][a]);
            if (col_scale[a] <= 0.0)
                throw convergence_error("fit_decay: normal equations are rank-deficient");
        }
        Params4 jtr_scaled{};
        std::array<std::array<double, 4>, 4> jtj_scaled{};
        for (int a = 0; a < 4; ++a) {
            jtr_scaled[a] = jtr[a] / col_scale[a];
            for (int b = 0; b < 4; ++b)
                jtj_scaled[a][b] = jtj[a][b] / (col_scale[a] * col_scale[b]);
        }
        Params4 delta = solve_normal_equations(jtj_scaled, jtr_scaled);
        for (int a = 0; a < 4; ++a) delta[a] /= col_scale[a];

        double pn = 0.0, dn = 0.0;
        for (int a = 0; a < 4; ++a) {
            pn += p[a] * p[a];
            dn += delta[a] * delta[a];
        }
        if (std::sqrt(dn) < kStepTol * (std::sqrt(pn) + kStepTol)) {
            res.converged = true;
            break;
        }

        double alpha = 1.0;
        bool improved = false;
        Params4 cand{};
        double cand_ssr = 0.0;
        for (int h = 0; h <= 30; ++h) {
            for (int a = 0; a < 4; ++a) cand[a] = p[a] + alpha * delta[a];
            cand_ssr = ssr(d, cand);
            if (cand_ssr < cur_ssr) {
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!improved) {
            // Stalled at numerical precision; accept as converged only if the
            // attempted full step was already negligible.
            res.converged = std::sqrt(dn) < 1e-7 * (std::sqrt(pn) + 1e-7);
            break;
        }
        p = cand;
        cur_ssr = cand_ssr;
    }
    res.p = p;
    res.ssr = cur_ssr;
    return res;
}

} // namespace

FitResult fit_decay(const Trace& trace) {
    trace.validate();
    DecayData d;
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace.t_us[i] >= trace.onset_us + trace.width_us) {
            d.s.push_back(trace.t_us[i] - trace.onset_us - trace.width_us);
            d.y.push_back(trace.g[i]);
        }
    }

    // Primary start from the peeling heuristic, then a fixed tau grid; the
    // converged attempt with the lowest residual wins. Noisy recordings
    // drive single starts into the collapsing-exponentials valley often
    // enough that restarts are required for a dependable estimator.
    const double g0 = d.y.front();
    const double span = std::max(d.s.back() - d.s.front(), 1.0);
    std::vector<Params4> starts = {initial_guess(d)};
    for (const double frac : {2.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0, 1.0 / 12.0, 1.0 / 24.0})
        for (const double ratio : {3.0, 10.0, 30.0})
            starts.push_back({g0 / 2.0, g0 / 2.0, span * frac / ratio, span * frac});

    GnOutcome best;
    bool have_converged = false;
    for (const Params4& p0 : starts) {
        GnOutcome out;
        try {
            out = gauss_newton(d, p0);
        } catch (const convergence_error&) {
            continue; // this start hit a singular system; try the next
        }
        const bool better = (out.converged && !have_converged) ||
                            (out.converged == have_converged && out.ssr < best.ssr);
        if (better) {
            best = out;
            have_converged = have_converged || out.converged;
        }
    }
    if (best.iterations == 0)
        throw convergence_error("fit_decay: normal equations are rank-deficient");

    Params4 p = best.p;
    if (p[3] < p[2]) {
        std::swap(p[0], p[1]);
        std::swap(p[2], p[3]);
    }
    FitResult res;
    res.iterations = best.iterations;
    res.converged = best.converged;
    res.params.a1 = p[0];
    res.params.a2 = p[1];
    res.params.tau1_us = p[2];
    res.params.tau2_us = p[3];
    res.params.width_us = trace.width_us;
    res.rmse = std::sqrt(best.ssr / static_cast<double>(d.s.size()));
    res.params.eta_sigma = res.rmse;
    return res;
}

FitSummary summarize_fits(const std::vector<FitResult>& fits) {
    if (fits.empty()) throw data_error("summarize_fits: empty fit set");
    FitSummary s;
    s.count = fits.size();
    const double n = static_cast<double>(fits.size());
    auto mean_of = [&](auto get) {
        double acc = 0.0;
        for (const auto& f : fits) acc += get(f);
        return acc / n;
    };
    auto std_of = [&](auto get, double mean) {
        if (fits.size() < 2) return 0.0;
        double acc = 0.0;
        for (const auto& f : fits) {
            const double d = get(f) - mean;
            acc += d * d;
        }
        return std::sqrt(acc / (n - 1.0));
    };
    auto a1 = [](const FitResult& f) { return f.params.a1; };
    auto a2 = [](const FitResult& f) { return f.params.a2; };
    auto t1 = [](const FitResult& f) { return f.params.tau1_us; };
    auto t2 = [](const FitResult& f) { return f.params.tau2_us; };
    s.mean.a1 = mean_of(a1);
    s.mean.a2 = mean_of(a2);
    s.mean.tau1_us = mean_of(t1);
    s.mean.tau2_us = mean_of(t2);
    s.mean.width_us = fits.front().params.width_us;
    s.std.a1 = std_of(a1, s.mean.a1);
    s.std.a2 = std_of(a2, s.mean.a2);
    s.std.tau1_us = std_of(t1, s.mean.tau1_us);
    s.std.tau2_us = std_of(t2, s.mean.tau2_us);
    s.eta_mean = mean_of([](const FitResult& f) { return f.rmse; });
    s.mean.eta_sigma = s.eta_mean;
    return s;
}

Trace read_trace_csv(const std::string& path, double onset_us, double width_us) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open trace file: " + path);
    Trace tr;
    tr.onset_us = onset_us;
    tr.width_us = width_us;
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty trace file: " + path);
    std::string header = line;
    header.erase(std::remove_if(header.begin(), header.end(),
                                [](char c) { return c == ' ' || c == '\r'; }),
                 header.end());
    if (header != "t_us,g") throw data_error("trace file " + path + ": expected header 't_us,g'");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        std::istringstream ls(line);
        double t, g;
        char comma;
        if (!(ls >> t >> comma >> g) || comma != ',')
            throw data_error("trace file " + path + ": malformed line " + std::to_string(lineno));
        tr.t_us.push_back(t);
        tr.g.push_back(g);
    }
    return tr;
}

} // namespace memhots
