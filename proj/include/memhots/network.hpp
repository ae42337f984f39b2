#pragma once

#include <string>
#include <utility>
#include <vector>

#include "memhots/clustering.hpp"
#include "memhots/events.hpp"
#include "memhots/svm.hpp"
#include "memhots/time_surface.hpp"

namespace memhots {

struct LayerConfig {
    int radius = 7;
    std::size_t n_clusters = 32;
    int pool_u = 1; // floor-divides this layer's output coordinates; 1 = no pooling
    KernelMode kernel = KernelMode::memristor_ideal();
    std::string preset = "1V_200us";

    void validate() const;
};

// Normalized per-recording count of last-layer polarities.
struct HistogramFeature {
    std::vector<double> values;
    bool empty = false;
    int label = -1;
};

enum class HistMetric { Euclidean, Bhattacharyya };

// Everything needed to classify at one network depth: the nearest-histogram
// training set, the SVC, and the fallback for empty features.
struct DepthClassifier {
    std::vector<std::vector<double>> train_features;
    std::vector<int> train_labels;
    SvcModel svc;
    int majority_label = 0;
};

struct NetworkModel {
    std::uint16_t input_width = 34;
    std::uint16_t input_height = 34;
    std::uint16_t input_polarities = 2;
    bool crop28 = false;
    std::vector<LayerConfig> layers;
    std::vector<Codebook> codebooks;          // one per layer once trained
    std::vector<DepthClassifier> classifiers; // one per depth once trained

    bool trained() const;
    void validate() const;
    // Dimensions/polarities of the event stream entering layer k.
    std::pair<std::uint16_t, std::uint16_t> layer_input_dims(std::size_t k) const;
    std::uint16_t layer_input_polarities(std::size_t k) const;
};

// Inference condition: Ideal runs the deterministic kernels; Noisy swaps
// every memristor layer to the stochastic model (parameter spreads and read
// noise scaled by noise_multiplier). Codebooks and classifiers are shared.
struct RunMode {
    bool noisy = false;
    std::uint64_t seed = 0;
    double noise_multiplier = 1.0;

    static RunMode ideal() { return {}; }
    static RunMode noisy_run(std::uint64_t seed, double multiplier = 1.0) {
        return {true, seed, multiplier};
    }
};

struct EncodeResult {
    std::vector<std::vector<Event>> streams; // output events per layer
    std::vector<AssignmentTrace> traces;     // aligned to each layer's input events
};

// Runs one recording through all layers: drive -> sample surface -> assign
// cluster -> emit event at pooled coordinates with the cluster index as
// polarity. Empty-flagged surfaces produce no output and a -1 trace entry.
EncodeResult encode_recording(const NetworkModel& model, const Recording& rec,
                              const RunMode& run, std::uint64_t recording_tag);

HistogramFeature histogram(const std::vector<Event>& last_layer_events,
                           std::size_t polarity_count);

int classify_hist(const DepthClassifier& cls, const HistogramFeature& query, HistMetric metric);

double bhattacharyya_distance(const std::vector<double>& p, const std::vector<double>& q);

// ---- training / evaluation pipeline ----

struct TrainPipelineConfig {
    std::vector<LayerConfig> layers;
    KMeansConfig kmeans;           // seed is derived from the master seed
    SvcConfig svc;
    std::size_t surface_cap = 50000; // per-layer training pool size
    std::uint64_t seed = 0;
    int jobs = 0;
    LoadOptions load;
};

// Trains codebooks layer-by-layer on deterministic-kernel surfaces, then the
// per-depth classifiers (Noisy inference reuses these: clusters are shared
// between conditions by construction).
NetworkModel train_network(const DatasetSlice& slice, const TrainPipelineConfig& cfg);

struct DepthMetrics {
    double hist_accuracy = 0.0;
    double svc_accuracy = 0.0;
    std::size_t empty_features = 0;
};

struct EvalResult {
    std::vector<DepthMetrics> depths;
    std::size_t recordings = 0;
};

EvalResult evaluate_network(const NetworkModel& model, const DatasetSlice& slice,
                            const RunMode& run, int jobs,
                            HistMetric metric = HistMetric::Euclidean);

// Aggregate per-layer dislocation between the Ideal and a Noisy pass over
// the same slice (fraction of events whose cluster assignment changed).
std::vector<double> dislocation_run(const NetworkModel& model, const DatasetSlice& slice,
                                    std::uint64_t noisy_seed, double multiplier, int jobs);

void save_model(const std::string& path, const NetworkModel& model);
NetworkModel load_model(const std::string& path);

} // namespace memhots
