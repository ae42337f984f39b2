#include "memhots/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "memhots/rng.hpp"
#include "memhots/util.hpp"

namespace memhots {

namespace {

struct PolarityIndex {
    std::vector<int> labels;                     // per recording
    std::vector<std::vector<double>> times;      // per recording, sorted, this polarity only
    std::vector<int> classes;                    // distinct labels, ascending
    std::map<int, std::size_t> class_sizes;
};

PolarityIndex build_index(const std::vector<LabeledStream>& recordings, std::uint16_t polarity) {
    PolarityIndex idx;
    idx.labels.reserve(recordings.size());
    idx.times.reserve(recordings.size());
    for (const LabeledStream& rec : recordings) {
        idx.labels.push_back(rec.label);
        std::vector<double> t;
        for (const Event& ev : rec.events)
            if (ev.p == polarity) t.push_back(static_cast<double>(ev.t_us));
        std::sort(t.begin(), t.end());
        idx.times.push_back(std::move(t));
        ++idx.class_sizes[rec.label];
    }
    for (const auto& [label, n] : idx.class_sizes) {
        if (n < 2)
            throw data_error("mutual_information: class " + std::to_string(label) +
                             " has fewer than 2 recordings");
        idx.classes.push_back(label);
    }
    return idx;
}

bool has_event_in_window(const std::vector<double>& times, double lo, double hi) {
    auto it = std::lower_bound(times.begin(), times.end(), lo);
    return it != times.end() && *it <= hi;
}

double xlog2_ratio(double p, double q) {
    if (p <= 0.0) return 0.0;
    return p * std::log2(p / q);
}

// MI of one reference event: response probabilities per class over the other
// recordings, marginal as the uniform class mixture.
double reference_mi(const PolarityIndex& idx, std::size_t ref_rec, double t_ref,
                    double delta_us) {
    const double lo = t_ref - delta_us / 2.0;
    const double hi = t_ref + delta_us / 2.0;
    const double n_classes = static_cast<double>(idx.classes.size());

    double p_marginal = 0.0;
    std::vector<double> p_cond(idx.classes.size(), 0.0);
    for (std::size_t c = 0; c < idx.classes.size(); ++c) {
        const int cls = idx.classes[c];
        std::size_t hits = 0, total = 0;
        for (std::size_t r = 0; r < idx.times.size(); ++r) {
            if (r == ref_rec || idx.labels[r] != cls) continue;
            ++total;
            if (has_event_in_window(idx.times[r], lo, hi)) ++hits;
        }
        p_cond[c] = total == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(total);
        p_marginal += p_cond[c] / n_classes;
    }

    double mi = 0.0;
    for (std::size_t c = 0; c < idx.classes.size(); ++c) {
        const double p1 = p_cond[c], q1 = p_marginal;
        const double p0 = 1.0 - p1, q0 = 1.0 - p_marginal;
        mi += (xlog2_ratio(p1, q1) + xlog2_ratio(p0, q0)) / n_classes;
    }
    return mi;
}

} // namespace

double mutual_information(const std::vector<LabeledStream>& recordings, std::uint16_t polarity,
                          double delta_us, const MiConfig& cfg) {
    if (delta_us <= 0.0) throw data_error("mutual_information: delta must be > 0");
    const PolarityIndex idx = build_index(recordings, polarity);

    double acc = 0.0;
    std::size_t n_refs = 0;
    for (std::size_t r = 0; r < idx.times.size(); ++r) {
        const auto& times = idx.times[r];
        if (times.empty()) continue;
        RngStream rng = RngStream(cfg.seed).split("mi").split(polarity).split(r);
        std::vector<std::size_t> order(times.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        const std::size_t take =
            std::min<std::size_t>(static_cast<std::size_t>(cfg.samples_per_recording),
                                  order.size());
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.next_u64() % (order.size() - i));
            std::swap(order[i], order[j]);
            acc += reference_mi(idx, r, times[order[i]], delta_us);
            ++n_refs;
        }
    }
    // A polarity that never fires has a constant (zero) response: zero bits.
    return n_refs == 0 ? 0.0 : acc / static_cast<double>(n_refs);
}

std::vector<double> mi_curve(const std::vector<LabeledStream>& recordings,
                             std::uint16_t polarity_count, const std::vector<double>& deltas_us,
                             const MiConfig& cfg, int jobs) {
    if (polarity_count == 0) throw data_error("mi_curve: no polarities");
    std::vector<std::vector<double>> per_polarity(polarity_count);
    parallel_for(polarity_count, jobs, [&](std::size_t q) {
        per_polarity[q].reserve(deltas_us.size());
        for (double delta : deltas_us)
            per_polarity[q].push_back(
                mutual_information(recordings, static_cast<std::uint16_t>(q), delta, cfg));
    });
    std::vector<double> curve(deltas_us.size(), 0.0);
    for (std::size_t q = 0; q < polarity_count; ++q)
        for (std::size_t d = 0; d < deltas_us.size(); ++d)
            curve[d] += per_polarity[q][d] / static_cast<double>(polarity_count);
    return curve;
}

std::vector<double> mi_loss(const std::vector<double>& ideal, const std::vector<double>& noisy) {
    if (ideal.size() != noisy.size()) throw data_error("mi_loss: curve length mismatch");
    std::vector<double> loss(ideal.size());
    for (std::size_t i = 0; i < ideal.size(); ++i)
        loss[i] = ideal[i] == 0.0 ? std::numeric_limits<double>::quiet_NaN()
                                  : (ideal[i] - noisy[i]) / ideal[i];
    return loss;
}

std::vector<std::vector<LabeledStream>> collect_layer_streams(const NetworkModel& model,
                                                              const DatasetSlice& slice,
                                                              const RunMode& run, int jobs) {
    model.validate();
    const LoadOptions load{model.crop28};
    std::vector<std::vector<LabeledStream>> layers(model.layers.size());
    for (auto& l : layers) l.resize(slice.entries.size());
    parallel_for(slice.entries.size(), jobs, [&](std::size_t r) {
        const Recording rec = load_entry(slice.entries[r], load);
        EncodeResult enc = encode_recording(model, rec, run, r);
        for (std::size_t k = 0; k < model.layers.size(); ++k) {
            layers[k][r].label = slice.entries[r].label;
            layers[k][r].events = std::move(enc.streams[k]);
        }
    });
    return layers;
}

std::vector<NoiseSweepPoint> noise_sweep(const NetworkModel& model, const DatasetSlice& slice,
                                         std::uint64_t seed,
                                         const std::vector<double>& multipliers, int jobs,
                                         HistMetric metric) {
    std::vector<NoiseSweepPoint> points;
    for (double m : multipliers) {
        if (m < 0.0) throw data_error("noise_sweep: multiplier must be >= 0");
        NoiseSweepPoint p;
        p.multiplier = m;
        p.eval = evaluate_network(model, slice, RunMode::noisy_run(seed, m), jobs, metric);
        points.push_back(std::move(p));
    }
    return points;
}

} // namespace memhots
