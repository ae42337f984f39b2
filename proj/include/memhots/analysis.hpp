#pragma once

#include <cstdint>
#include <vector>

#include "memhots/events.hpp"
#include "memhots/network.hpp"

namespace memhots {

// One recording's output events at some layer, with its stimulus class.
struct LabeledStream {
    int label = -1;
    std::vector<Event> events;
};

struct MiConfig {
    int samples_per_recording = 20;
    std::uint64_t seed = 0;
};

// Plug-in mutual information (bits) between the stimulus class and the
// binary response "at least one event of this polarity within a window of
// length delta centered on a reference timestamp". Reference events are
// drawn (seeded) from each recording's events of that polarity; conditional
// probabilities are estimated over the other recordings and the marginal is
// their uniform class mixture, so the estimate is >= 0 by construction.
// Throws when any class has fewer than two recordings.
double mutual_information(const std::vector<LabeledStream>& recordings, std::uint16_t polarity,
                          double delta_us, const MiConfig& cfg);

// MI averaged over all polarities, one value per window size.
std::vector<double> mi_curve(const std::vector<LabeledStream>& recordings,
                             std::uint16_t polarity_count, const std::vector<double>& deltas_us,
                             const MiConfig& cfg, int jobs = 0);

// Per-window fraction (ideal - noisy) / ideal; NaN where the ideal MI is 0
// (flagged undefined, excluded from summaries).
std::vector<double> mi_loss(const std::vector<double>& ideal, const std::vector<double>& noisy);

// Encodes a slice and collects each layer's output streams with labels.
std::vector<std::vector<LabeledStream>> collect_layer_streams(const NetworkModel& model,
                                                              const DatasetSlice& slice,
                                                              const RunMode& run, int jobs);

struct NoiseSweepPoint {
    double multiplier = 1.0;
    EvalResult eval;
};

// Noisy inference with all parameter spreads (and read noise) scaled by each
// multiplier; multiplier 0 reproduces the Ideal pass bit-for-bit.
std::vector<NoiseSweepPoint> noise_sweep(const NetworkModel& model, const DatasetSlice& slice,
                                         std::uint64_t seed,
                                         const std::vector<double>& multipliers, int jobs,
                                         HistMetric metric = HistMetric::Euclidean);

} // namespace memhots
