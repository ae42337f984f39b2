#include "memhots/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>

#include "memhots/rng.hpp"
#include "memhots/util.hpp"

namespace memhots {

void LayerConfig::validate() const {
    if (radius < 1) throw data_error("layer config: radius must be >= 1");
    if (n_clusters < 2) throw data_error("layer config: cluster count must be >= 2");
    if (pool_u < 1) throw data_error("layer config: pooling factor must be >= 1");
    (void)memhots::preset(preset); // throws on an unknown preset name
}

bool NetworkModel::trained() const {
    return !layers.empty() && codebooks.size() == layers.size() &&
           classifiers.size() == layers.size();
}

void NetworkModel::validate() const {
    if (layers.empty()) throw data_error("network model: no layers configured");
    for (const auto& l : layers) l.validate();
    if (codebooks.size() != layers.size())
        throw data_error("network model: untrained (missing codebooks)");
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const std::size_t dim =
            MemristorGrid::surface_dim(layers[k].radius, layer_input_polarities(k));
        if (codebooks[k].n != layers[k].n_clusters || codebooks[k].dim != dim)
            throw data_error("network model: codebook " + std::to_string(k) +
                             " does not match its layer configuration");
    }
}

std::pair<std::uint16_t, std::uint16_t> NetworkModel::layer_input_dims(std::size_t k) const {
    std::uint16_t w = input_width, h = input_height;
    for (std::size_t i = 0; i < k; ++i) {
        const int u = layers[i].pool_u;
        if (u > 1) {
            // Sized so the edge pixels of a non-divisible dimension stay in
            // range: max pooled coordinate is (dim-1)//u.
            w = static_cast<std::uint16_t>((w - 1) / u + 1);
            h = static_cast<std::uint16_t>((h - 1) / u + 1);
        }
    }
    return {w, h};
}

std::uint16_t NetworkModel::layer_input_polarities(std::size_t k) const {
    if (k == 0) return input_polarities;
    return static_cast<std::uint16_t>(layers[k - 1].n_clusters);
}

namespace {

MemristorGrid make_layer_grid(const NetworkModel& model, std::size_t k, const RunMode& run) {
    const auto [w, h] = model.layer_input_dims(k);
    const std::uint16_t pol = model.layer_input_polarities(k);
    const LayerConfig& layer = model.layers[k];

    KernelMode kernel = layer.kernel;
    ParamDistributions dist = preset(layer.preset);
    if (run.noisy && kernel.kind == KernelMode::Kind::MemristorIdeal) {
        kernel = KernelMode::memristor_stochastic(
            RngStream(run.seed).split("layer-noise").split(k).key());
        dist = dist.scaled_noise(run.noise_multiplier);
    }
    return MemristorGrid(w, h, pol, dist, kernel);
}

// Shared body of inference and training-time surface collection. When
// observe_layer >= 0 the walk stops at that layer and hands each non-empty
// surface to the observer instead of assigning it.
EncodeResult encode_impl(const NetworkModel& model, const Recording& rec, const RunMode& run,
                         std::uint64_t recording_tag, int observe_layer,
                         const std::function<void(std::size_t, const TimeSurface&)>& observer) {
    const std::size_t n_layers =
        observe_layer >= 0 ? static_cast<std::size_t>(observe_layer) + 1 : model.layers.size();

    const auto [w0, h0] = model.layer_input_dims(0);
    if (rec.width != w0 || rec.height != h0 || rec.polarity_count != model.input_polarities)
        throw data_error("encode: recording dimensions do not match the model input");

    EncodeResult result;
    result.streams.resize(n_layers);
    result.traces.resize(n_layers);

    const std::vector<Event>* input = &rec.events;
    for (std::size_t k = 0; k < n_layers; ++k) {
        const LayerConfig& layer = model.layers[k];
        const bool observing = observe_layer == static_cast<int>(k);
        if (!observing && k >= model.codebooks.size())
            throw data_error("encode: model has no codebook for layer " + std::to_string(k));

        MemristorGrid grid = make_layer_grid(model, k, run);
        grid.reset(RngStream(recording_tag).split("layer").split(k).key());

        auto& out = result.streams[k];
        auto& trace = result.traces[k];
        out.reserve(input->size());
        trace.reserve(input->size());
        for (std::size_t e = 0; e < input->size(); ++e) {
            const Event& ev = (*input)[e];
            grid.drive(ev);
            const TimeSurface surf = grid.sample_surface(ev, layer.radius);
            if (surf.empty) {
                trace.push_back(-1);
                continue;
            }
            if (observing) {
                observer(e, surf);
                trace.push_back(-1);
                continue;
            }
            const std::size_t cluster = assign(model.codebooks[k], surf.values);
            trace.push_back(static_cast<std::int32_t>(cluster));
            Event out_ev;
            out_ev.t_us = ev.t_us;
            out_ev.p = static_cast<std::uint16_t>(cluster);
            const int u = layer.pool_u;
            out_ev.x = u > 1 ? static_cast<std::uint16_t>(ev.x / u) : ev.x;
            out_ev.y = u > 1 ? static_cast<std::uint16_t>(ev.y / u) : ev.y;
            out.push_back(out_ev);
        }
        input = &out;
    }
    return result;
}

} // namespace

EncodeResult encode_recording(const NetworkModel& model, const Recording& rec,
                              const RunMode& run, std::uint64_t recording_tag) {
    model.validate();
    return encode_impl(model, rec, run, recording_tag, -1, {});
}

HistogramFeature histogram(const std::vector<Event>& last_layer_events,
                           std::size_t polarity_count) {
    HistogramFeature f;
    f.values.assign(polarity_count, 0.0);
    if (last_layer_events.empty()) {
        f.empty = true;
        return f;
    }
    for (const Event& ev : last_layer_events) {
        if (ev.p >= polarity_count)
            throw data_error("histogram: polarity " + std::to_string(ev.p) + " out of range");
        f.values[ev.p] += 1.0;
    }
    const double total = static_cast<double>(last_layer_events.size());
    for (double& v : f.values) v /= total;
    return f;
}

double bhattacharyya_distance(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw data_error("bhattacharyya: dimension mismatch");
    double bc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) bc += std::sqrt(p[i] * q[i]);
    if (bc <= 0.0) return std::numeric_limits<double>::infinity();
    return -std::log(bc);
}

int classify_hist(const DepthClassifier& cls, const HistogramFeature& query, HistMetric metric) {
    if (cls.train_features.empty()) throw data_error("classify_hist: empty training set");
    if (query.empty) return cls.majority_label;
    double best = std::numeric_limits<double>::infinity();
    int best_label = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < cls.train_features.size(); ++i) {
        const auto& f = cls.train_features[i];
        if (f.size() != query.values.size()) throw data_error("classify_hist: dimension mismatch");
        double d;
        if (metric == HistMetric::Euclidean) {
            d = 0.0;
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double diff = f[j] - query.values[j];
                d += diff * diff;
            }
        } else {
            d = bhattacharyya_distance(query.values, f);
        }
        const int label = cls.train_labels[i];
        if (d < best || (d == best && label < best_label)) {
            best = d;
            best_label = label;
        }
    }
    return best_label;
}

namespace {

// Deterministic uniform reservoir: keeps the cap entries with the smallest
// (priority, ordinal) keys, which is independent of arrival order.
class SurfacePool {
public:
    SurfacePool(std::size_t cap, std::size_t dim, std::uint64_t key)
        : cap_(cap), dim_(dim), key_(key) {
        slots_.reserve(std::min<std::size_t>(cap, 4096) * dim);
    }

    void offer(std::uint64_t ordinal, const std::vector<double>& v) {
        const std::uint64_t prio = RngStream::mix(key_ ^ ordinal);
        std::lock_guard lock(mutex_);
        if (heap_.size() < cap_) {
            const std::uint32_t slot = static_cast<std::uint32_t>(heap_.size());
            slots_.resize(slots_.size() + dim_);
            std::memcpy(slots_.data() + static_cast<std::size_t>(slot) * dim_, v.data(),
                        dim_ * sizeof(double));
            heap_.push_back({prio, ordinal, slot});
            std::push_heap(heap_.begin(), heap_.end(), less_);
            return;
        }
        if (std::pair(prio, ordinal) >= std::pair(heap_.front().prio, heap_.front().ordinal))
            return;
        std::pop_heap(heap_.begin(), heap_.end(), less_);
        Entry& victim = heap_.back();
        std::memcpy(slots_.data() + static_cast<std::size_t>(victim.slot) * dim_, v.data(),
                    dim_ * sizeof(double));
        victim.prio = prio;
        victim.ordinal = ordinal;
        std::push_heap(heap_.begin(), heap_.end(), less_);
    }

    SampleMatrix finish() {
        std::sort(heap_.begin(), heap_.end(), [](const Entry& a, const Entry& b) {
            return std::pair(a.prio, a.ordinal) < std::pair(b.prio, b.ordinal);
        });
        SampleMatrix m;
        m.dim = dim_;
        m.count = heap_.size();
        m.data.resize(heap_.size() * dim_);
        for (std::size_t i = 0; i < heap_.size(); ++i)
            std::memcpy(m.data.data() + i * dim_,
                        slots_.data() + static_cast<std::size_t>(heap_[i].slot) * dim_,
                        dim_ * sizeof(double));
        return m;
    }

private:
    struct Entry {
        std::uint64_t prio;
        std::uint64_t ordinal;
        std::uint32_t slot;
    };
    static bool less_(const Entry& a, const Entry& b) {
        return std::pair(a.prio, a.ordinal) < std::pair(b.prio, b.ordinal);
    }

    std::size_t cap_, dim_;
    std::uint64_t key_;
    std::vector<Entry> heap_;
    std::vector<double> slots_;
    std::mutex mutex_;
};

int majority(const std::vector<int>& labels) {
    std::map<int, std::size_t> counts;
    for (int l : labels) ++counts[l];
    int best = labels.empty() ? 0 : labels.front();
    std::size_t best_n = 0;
    for (const auto& [label, n] : counts) {
        if (n > best_n) { // map iterates ascending, so ties keep the lowest
            best_n = n;
            best = label;
        }
    }
    return best;
}

} // namespace

NetworkModel train_network(const DatasetSlice& slice, const TrainPipelineConfig& cfg) {
    if (slice.entries.empty()) throw data_error("train_network: empty dataset slice");
    if (cfg.layers.empty()) throw data_error("train_network: no layers configured");
    for (const auto& l : cfg.layers) l.validate();

    NetworkModel model;
    model.layers = cfg.layers;
    model.crop28 = cfg.load.crop28;
    {
        const Recording first = load_entry(slice.entries.front(), cfg.load);
        model.input_width = first.width;
        model.input_height = first.height;
        model.input_polarities = first.polarity_count;
    }
    const RngStream master(cfg.seed);

    // Codebooks, bottom-up: surfaces for layer k are produced by the already
    // trained layers below it, deterministic kernels throughout.
    for (std::size_t k = 0; k < cfg.layers.size(); ++k) {
        const std::size_t dim =
            MemristorGrid::surface_dim(cfg.layers[k].radius, model.layer_input_polarities(k));
        SurfacePool pool(cfg.surface_cap, dim, master.split("surface-pool").split(k).key());
        parallel_for(slice.entries.size(), cfg.jobs, [&](std::size_t r) {
            const Recording rec = load_entry(slice.entries[r], cfg.load);
            encode_impl(model, rec, RunMode::ideal(), r, static_cast<int>(k),
                        [&](std::size_t e, const TimeSurface& surf) {
                            pool.offer((static_cast<std::uint64_t>(r) << 24) | e, surf.values);
                        });
        });
        const SampleMatrix samples = pool.finish();
        KMeansConfig kc = cfg.kmeans;
        kc.seed = master.split("kmeans").split(k).key();
        model.codebooks.push_back(fit_minibatch(samples, cfg.layers[k].n_clusters, kc));
    }

    // Per-depth histogram features of the training slice.
    const std::size_t depths = cfg.layers.size();
    std::vector<std::vector<HistogramFeature>> feats(depths);
    for (auto& f : feats) f.resize(slice.entries.size());
    parallel_for(slice.entries.size(), cfg.jobs, [&](std::size_t r) {
        const Recording rec = load_entry(slice.entries[r], cfg.load);
        const EncodeResult enc = encode_impl(model, rec, RunMode::ideal(), r, -1, {});
        for (std::size_t d = 0; d < depths; ++d) {
            feats[d][r] = histogram(enc.streams[d], cfg.layers[d].n_clusters);
            feats[d][r].label = slice.entries[r].label;
        }
    });

    for (std::size_t d = 0; d < depths; ++d) {
        DepthClassifier cls;
        for (std::size_t r = 0; r < slice.entries.size(); ++r) {
            if (feats[d][r].empty) continue;
            cls.train_features.push_back(feats[d][r].values);
            cls.train_labels.push_back(feats[d][r].label);
        }
        if (cls.train_features.empty())
            throw data_error("train_network: every training recording produced an empty feature");
        cls.majority_label = majority(cls.train_labels);
        SvcConfig svc_cfg = cfg.svc;
        cls.svc = train_svc(cls.train_features, cls.train_labels, svc_cfg);
        model.classifiers.push_back(std::move(cls));
    }
    return model;
}

EvalResult evaluate_network(const NetworkModel& model, const DatasetSlice& slice,
                            const RunMode& run, int jobs, HistMetric metric) {
    model.validate();
    if (model.classifiers.size() != model.layers.size())
        throw data_error("evaluate_network: untrained model (missing classifiers)");
    if (slice.entries.empty()) throw data_error("evaluate_network: empty dataset slice");

    const std::size_t depths = model.layers.size();
    const LoadOptions load{model.crop28};
    std::vector<std::vector<std::uint8_t>> hist_ok(depths), svc_ok(depths), empty(depths);
    for (std::size_t d = 0; d < depths; ++d) {
        hist_ok[d].assign(slice.entries.size(), 0);
        svc_ok[d].assign(slice.entries.size(), 0);
        empty[d].assign(slice.entries.size(), 0);
    }
    parallel_for(slice.entries.size(), jobs, [&](std::size_t r) {
        const Recording rec = load_entry(slice.entries[r], load);
        const EncodeResult enc = encode_impl(model, rec, run, r, -1, {});
        for (std::size_t d = 0; d < depths; ++d) {
            HistogramFeature f = histogram(enc.streams[d], model.layers[d].n_clusters);
            empty[d][r] = f.empty ? 1 : 0;
            const int truth = slice.entries[r].label;
            hist_ok[d][r] = classify_hist(model.classifiers[d], f, metric) == truth;
            const int svc_pred = f.empty ? model.classifiers[d].majority_label
                                         : predict_svc(model.classifiers[d].svc, f.values);
            svc_ok[d][r] = svc_pred == truth;
        }
    });

    EvalResult res;
    res.recordings = slice.entries.size();
    for (std::size_t d = 0; d < depths; ++d) {
        DepthMetrics m;
        std::size_t h = 0, s = 0, e = 0;
        for (std::size_t r = 0; r < slice.entries.size(); ++r) {
            h += hist_ok[d][r];
            s += svc_ok[d][r];
            e += empty[d][r];
        }
        m.hist_accuracy = static_cast<double>(h) / static_cast<double>(res.recordings);
        m.svc_accuracy = static_cast<double>(s) / static_cast<double>(res.recordings);
        m.empty_features = e;
        res.depths.push_back(m);
    }
    return res;
}

std::vector<double> dislocation_run(const NetworkModel& model, const DatasetSlice& slice,
                                    std::uint64_t noisy_seed, double multiplier, int jobs) {
    model.validate();
    if (slice.entries.empty()) throw data_error("dislocation_run: empty dataset slice");
    const LoadOptions load{model.crop28};
    const std::size_t depths = model.layers.size();
    std::vector<std::vector<std::uint64_t>> diff(depths), total(depths);
    for (std::size_t d = 0; d < depths; ++d) {
        diff[d].assign(slice.entries.size(), 0);
        total[d].assign(slice.entries.size(), 0);
    }
    parallel_for(slice.entries.size(), jobs, [&](std::size_t r) {
        const Recording rec = load_entry(slice.entries[r], load);
        const EncodeResult ideal = encode_impl(model, rec, RunMode::ideal(), r, -1, {});
        const EncodeResult noisy =
            encode_impl(model, rec, RunMode::noisy_run(noisy_seed, multiplier), r, -1, {});
        for (std::size_t d = 0; d < depths; ++d) {
            const AssignmentTrace& a = ideal.traces[d];
            const AssignmentTrace& b = noisy.traces[d];
            const std::size_t n = std::min(a.size(), b.size());
            // Traces are aligned to the layer's input events. A noisy-side
            // empty surface shortens the downstream input stream; compare
            // the common prefix and count the overhang as dislocated.
            for (std::size_t i = 0; i < n; ++i)
                if (a[i] != b[i]) ++diff[d][r];
            diff[d][r] += std::max(a.size(), b.size()) - n;
            total[d][r] += std::max(a.size(), b.size());
        }
    });
    std::vector<double> out(depths, 0.0);
    for (std::size_t d = 0; d < depths; ++d) {
        std::uint64_t dd = 0, tt = 0;
        for (std::size_t r = 0; r < slice.entries.size(); ++r) {
            dd += diff[d][r];
            tt += total[d][r];
        }
        out[d] = tt == 0 ? 0.0 : static_cast<double>(dd) / static_cast<double>(tt);
    }
    return out;
}

// ---- model serialization ----

namespace {
constexpr std::uint32_t kModelMagic = 0x4D484D44; // "MHMD"
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw data_error("model file: truncated");
    return v;
}

void put_string(std::ofstream& out, const std::string& s) {
    put(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::ifstream& in) {
    const auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    in.read(s.data(), n);
    if (!in) throw data_error("model file: truncated string");
    return s;
}

void put_doubles(std::ofstream& out, const std::vector<double>& v) {
    put(out, static_cast<std::uint64_t>(v.size()));
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(v.size() * sizeof(double)));
}

std::vector<double> get_doubles(std::ifstream& in) {
    const auto n = get<std::uint64_t>(in);
    std::vector<double> v(n);
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) throw data_error("model file: truncated array");
    return v;
}
} // namespace

void save_model(const std::string& path, const NetworkModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write model file: " + path);
    put(out, kModelMagic);
    put(out, kModelVersion);
    put(out, model.input_width);
    put(out, model.input_height);
    put(out, model.input_polarities);
    put(out, static_cast<std::uint8_t>(model.crop28));
    put(out, static_cast<std::uint32_t>(model.layers.size()));
    for (const LayerConfig& l : model.layers) {
        put(out, static_cast<std::int32_t>(l.radius));
        put(out, static_cast<std::uint64_t>(l.n_clusters));
        put(out, static_cast<std::int32_t>(l.pool_u));
        put(out, static_cast<std::uint8_t>(l.kernel.kind));
        put(out, l.kernel.seed);
        put(out, l.kernel.tau_us);
        put_string(out, l.preset);
    }
    put(out, static_cast<std::uint32_t>(model.codebooks.size()));
    for (const Codebook& cb : model.codebooks) {
        put(out, static_cast<std::uint64_t>(cb.n));
        put(out, static_cast<std::uint64_t>(cb.dim));
        put_doubles(out, cb.centroids);
    }
    put(out, static_cast<std::uint32_t>(model.classifiers.size()));
    for (const DepthClassifier& c : model.classifiers) {
        put(out, static_cast<std::int32_t>(c.majority_label));
        put(out, static_cast<std::uint64_t>(c.train_features.size()));
        for (std::size_t i = 0; i < c.train_features.size(); ++i) {
            put(out, static_cast<std::int32_t>(c.train_labels[i]));
            put_doubles(out, c.train_features[i]);
        }
        const SvcModel& svc = c.svc;
        put(out, svc.config.C);
        put(out, static_cast<std::int32_t>(svc.config.degree));
        put(out, svc.config.gamma);
        put(out, svc.config.coef0);
        put(out, svc.config.tol);
        put(out, svc.config.max_steps);
        put(out, static_cast<std::uint64_t>(svc.dim));
        put(out, static_cast<std::uint32_t>(svc.labels.size()));
        for (int l : svc.labels) put(out, static_cast<std::int32_t>(l));
        put(out, static_cast<std::uint32_t>(svc.machines.size()));
        for (const auto& m : svc.machines) {
            put(out, static_cast<std::int32_t>(m.label_pos));
            put(out, static_cast<std::int32_t>(m.label_neg));
            put(out, m.bias);
            put(out, static_cast<std::uint64_t>(m.support_vectors.size()));
            for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
                put(out, m.coef[i]);
                put_doubles(out, m.support_vectors[i]);
            }
        }
    }
}

NetworkModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open model file: " + path);
    if (get<std::uint32_t>(in) != kModelMagic)
        throw data_error("model file: bad magic in " + path);
    if (get<std::uint32_t>(in) != kModelVersion)
        throw data_error("model file: unsupported version in " + path);
    NetworkModel model;
    model.input_width = get<std::uint16_t>(in);
    model.input_height = get<std::uint16_t>(in);
    model.input_polarities = get<std::uint16_t>(in);
    model.crop28 = get<std::uint8_t>(in) != 0;
    const auto n_layers = get<std::uint32_t>(in);
    for (std::uint32_t k = 0; k < n_layers; ++k) {
        LayerConfig l;
        l.radius = get<std::int32_t>(in);
        l.n_clusters = get<std::uint64_t>(in);
        l.pool_u = get<std::int32_t>(in);
        l.kernel.kind = static_cast<KernelMode::Kind>(get<std::uint8_t>(in));
        l.kernel.seed = get<std::uint64_t>(in);
        l.kernel.tau_us = get<double>(in);
        l.preset = get_string(in);
        model.layers.push_back(std::move(l));
    }
    const auto n_codebooks = get<std::uint32_t>(in);
    for (std::uint32_t k = 0; k < n_codebooks; ++k) {
        Codebook cb;
        cb.n = get<std::uint64_t>(in);
        cb.dim = get<std::uint64_t>(in);
        cb.centroids = get_doubles(in);
        if (cb.centroids.size() != cb.n * cb.dim)
            throw data_error("model file: codebook size mismatch");
        model.codebooks.push_back(std::move(cb));
    }
    const auto n_classifiers = get<std::uint32_t>(in);
    for (std::uint32_t c = 0; c < n_classifiers; ++c) {
        DepthClassifier cls;
        cls.majority_label = get<std::int32_t>(in);
        const auto n_feats = get<std::uint64_t>(in);
        for (std::uint64_t i = 0; i < n_feats; ++i) {
            cls.train_labels.push_back(get<std::int32_t>(in));
            cls.train_features.push_back(get_doubles(in));
        }
        cls.svc.config.C = get<double>(in);
        cls.svc.config.degree = get<std::int32_t>(in);
        cls.svc.config.gamma = get<double>(in);
        cls.svc.config.coef0 = get<double>(in);
        cls.svc.config.tol = get<double>(in);
        cls.svc.config.max_steps = get<std::uint64_t>(in);
        cls.svc.dim = get<std::uint64_t>(in);
        const auto n_labels = get<std::uint32_t>(in);
        for (std::uint32_t i = 0; i < n_labels; ++i)
            cls.svc.labels.push_back(get<std::int32_t>(in));
        const auto n_machines = get<std::uint32_t>(in);
        for (std::uint32_t m = 0; m < n_machines; ++m) {
            SvcModel::PairMachine pm;
            pm.label_pos = get<std::int32_t>(in);
            pm.label_neg = get<std::int32_t>(in);
            pm.bias = get<double>(in);
            const auto n_sv = get<std::uint64_t>(in);
            for (std::uint64_t i = 0; i < n_sv; ++i) {
                pm.coef.push_back(get<double>(in));
                pm.support_vectors.push_back(get_doubles(in));
            }
            cls.svc.machines.push_back(std::move(pm));
        }
        model.classifiers.push_back(std::move(cls));
    }
    return model;
}

} // namespace memhots
