#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "memhots/analysis.hpp"
#include "memhots/dataset_synth.hpp"
#include "memhots/device.hpp"
#include "memhots/errors.hpp"
#include "memhots/events.hpp"
#include "memhots/manifest.hpp"
#include "memhots/network.hpp"
#include "memhots/rng.hpp"
#include "memhots/time_surface.hpp"
#include "memhots/trace_fit.hpp"
#include "memhots/util.hpp"

namespace fs = std::filesystem;
using namespace memhots;
using nlohmann::json;

namespace {

int run_cli(const std::vector<std::string>& args, int depth);

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw data_error("expected a comma-separated list, got '" + s + "'");
    return out;
}

std::vector<int> parse_ints(const std::string& s) {
    std::vector<int> out;
    for (double v : parse_doubles(s)) out.push_back(static_cast<int>(v));
    return out;
}

std::uint64_t sub_seed(std::uint64_t master, std::string_view name, std::uint64_t idx = 0) {
    return RngStream(master).split(name).split(idx).key();
}

std::string slice_digest(const DatasetSlice& slice) {
    std::string all;
    for (const auto& e : slice.entries) all += e.path + "," + std::to_string(e.label) + "\n";
    return bytes_digest(all.data(), all.size());
}

json slice_config(const DatasetSlice& slice) {
    return json{{"split", slice.split},
                {"fraction", slice.fraction},
                {"seed", slice.seed},
                {"recordings", slice.entries.size()}};
}

void write_json_file(const std::string& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

double median(std::vector<double> v) {
    v.erase(std::remove_if(v.begin(), v.end(), [](double x) { return std::isnan(x); }), v.end());
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---- simulate ----

struct SimulateOpts {
    std::string preset_name = "1V_200us";
    std::string schedule;
    std::string mode = "ideal";
    std::string sampling = "per-pulse";
    std::uint64_t seed = 0;
    double multiplier = 1.0;
    double sample_every_us = 6000.0;
    double until_us = 0.0;
    std::string out;
};

std::vector<std::int64_t> read_schedule(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open pulse schedule: " + path);
    std::string line;
    if (!std::getline(in, line)) throw data_error("empty pulse schedule: " + path);
    line.erase(std::remove_if(line.begin(), line.end(),
                              [](char c) { return c == ' ' || c == '\r'; }),
               line.end());
    if (line != "t_us") throw data_error("pulse schedule " + path + ": expected header 't_us'");
    std::vector<std::int64_t> pulses;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        try {
            pulses.push_back(std::stoll(line));
        } catch (const std::exception&) {
            throw data_error("pulse schedule " + path + ": bad value '" + line + "'");
        }
    }
    if (pulses.empty()) throw data_error("pulse schedule " + path + ": no pulses");
    if (!std::is_sorted(pulses.begin(), pulses.end()))
        throw data_error("pulse schedule " + path + ": pulse times must be non-decreasing");
    return pulses;
}

int cmd_simulate(const SimulateOpts& o, const std::vector<std::string>& argv) {
    ParamDistributions dist = preset(o.preset_name);
    const bool noisy = o.mode == "noisy";
    if (!noisy && o.mode != "ideal") throw data_error("--mode must be ideal or noisy");
    if (noisy) dist = dist.scaled_noise(o.multiplier);
    const std::uint64_t device_seed = sub_seed(o.seed, "simulate");
    const KernelMode kernel =
        noisy ? KernelMode::memristor_stochastic(device_seed) : KernelMode::memristor_ideal();
    const ParamSampling sampling = o.sampling == "per-device" ? ParamSampling::PerDevice
                                   : o.sampling == "per-pulse"
                                       ? ParamSampling::PerPulse
                                       : throw data_error("--sampling must be per-pulse or per-device");

    const std::vector<std::int64_t> pulses = read_schedule(o.schedule);
    const double w = dist.mean.width_us;
    double until = o.until_us;
    if (until <= 0.0) until = static_cast<double>(pulses.back()) + w + 5.0 * dist.mean.tau2_us;

    // Uniform read grid plus each pulse onset and peak, so sub-sample-rate
    // rises still appear in the trace.
    std::vector<double> samples;
    for (double t = 0.0; t <= until; t += o.sample_every_us) samples.push_back(t);
    for (std::int64_t p : pulses) {
        samples.push_back(static_cast<double>(p));
        samples.push_back(static_cast<double>(p) + w);
    }
    std::sort(samples.begin(), samples.end());
    samples.erase(std::unique(samples.begin(), samples.end()), samples.end());

    MemristorGrid grid(1, 1, 1, dist, kernel, sampling);
    grid.reset(0);
    std::ostringstream csv;
    csv << "t_us,g\n";
    std::size_t next_pulse = 0;
    for (double t : samples) {
        while (next_pulse < pulses.size() && static_cast<double>(pulses[next_pulse]) <= t) {
            grid.drive(Event{pulses[next_pulse], 0, 0, 0});
            ++next_pulse;
        }
        csv << fmt(t) << "," << fmt(grid.read_device(0, 0, 0, t)) << "\n";
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "conductance.csv").string(), csv.str());

    RunManifest m;
    m.command = "simulate";
    m.argv = argv;
    m.config = {{"preset", o.preset_name},       {"mode", o.mode},
                {"seed", o.seed},                {"device_seed", device_seed},
                {"multiplier", o.multiplier},    {"sample_every_us", o.sample_every_us},
                {"until_us", until},             {"sampling", o.sampling},
                {"pulses", pulses.size()}};
    m.inputs[o.schedule] = file_digest(o.schedule);
    write_manifest(o.out, m);
    std::cout << "simulate: " << pulses.size() << " pulses, " << samples.size()
              << " samples -> " << (fs::path(o.out) / "conductance.csv").string() << "\n";
    return 0;
}

// ---- fit ----

struct FitOpts {
    std::vector<std::string> traces;
    std::string manifest_csv;
    double onset_us = 0.0;
    double width_us = 0.0;
    double peak_reference = 0.0;
    bool no_normalize = false;
    int jobs = 0;
    std::string out;
};

int cmd_fit(const FitOpts& o, const std::vector<std::string>& argv) {
    struct Entry {
        std::string file;
        double onset, width;
    };
    std::vector<Entry> entries;
    if (!o.manifest_csv.empty()) {
        std::ifstream in(o.manifest_csv);
        if (!in) throw data_error("cannot open trace manifest: " + o.manifest_csv);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
            if (line.empty() || line == "\r") continue;
            std::stringstream ss(line);
            Entry e;
            std::string f, a, b;
            if (!std::getline(ss, f, ',') || !std::getline(ss, a, ',') || !std::getline(ss, b))
                throw data_error("trace manifest: malformed line '" + line + "'");
            e.file = f;
            e.onset = std::stod(a);
            e.width = std::stod(b);
            entries.push_back(e);
        }
    } else {
        if (o.traces.empty())
            throw data_error("fit: provide --trace files or --trace-manifest");
        if (o.width_us <= 0.0) throw data_error("fit: --width-us must be > 0");
        for (const auto& f : o.traces) entries.push_back({f, o.onset_us, o.width_us});
    }

    std::vector<Trace> raw;
    for (const auto& e : entries) raw.push_back(read_trace_csv(e.file, e.onset, e.width));

    double peak_ref = o.peak_reference;
    std::vector<Trace> traces = raw;
    if (!o.no_normalize) {
        if (peak_ref <= 0.0) peak_ref = group_peak_reference(raw);
        for (auto& tr : traces) tr = normalize_trace(tr, peak_ref);
    }

    std::vector<FitResult> fits(traces.size());
    parallel_for(traces.size(), o.jobs, [&](std::size_t i) { fits[i] = fit_decay(traces[i]); });

    json per_file = json::array();
    bool all_converged = true;
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const FitResult& f = fits[i];
        all_converged = all_converged && f.converged;
        per_file.push_back({{"file", entries[i].file},
                            {"a1", f.params.a1},
                            {"a2", f.params.a2},
                            {"tau1_us", f.params.tau1_us},
                            {"tau2_us", f.params.tau2_us},
                            {"width_us", f.params.width_us},
                            {"rmse", f.rmse},
                            {"iterations", f.iterations},
                            {"converged", f.converged}});
    }
    const FitSummary s = summarize_fits(fits);
    json summary = {{"count", s.count},
                    {"a1_mean", s.mean.a1},         {"a1_std", s.std.a1},
                    {"a2_mean", s.mean.a2},         {"a2_std", s.std.a2},
                    {"tau1_us_mean", s.mean.tau1_us}, {"tau1_us_std", s.std.tau1_us},
                    {"tau2_us_mean", s.mean.tau2_us}, {"tau2_us_std", s.std.tau2_us},
                    {"eta", s.eta_mean},
                    {"peak_reference", o.no_normalize ? 0.0 : peak_ref}};

    fs::create_directories(o.out);
    write_json_file((fs::path(o.out) / "fits.json").string(), per_file);
    write_json_file((fs::path(o.out) / "summary.json").string(), summary);

    RunManifest m;
    m.command = "fit";
    m.argv = argv;
    m.config = summary;
    for (const auto& e : entries) m.inputs[e.file] = file_digest(e.file);
    write_manifest(o.out, m);

    std::cout << "fit: " << fits.size() << " traces, a1=" << s.mean.a1 << "+/-" << s.std.a1
              << " tau1=" << s.mean.tau1_us / 1000.0 << "ms tau2=" << s.mean.tau2_us / 1000.0
              << "ms eta=" << s.eta_mean << (all_converged ? "" : " [NOT ALL CONVERGED]")
              << "\n";
    return all_converged ? 0 : 3;
}

// ---- dataset ----

struct DatasetOpts {
    std::string root;
    std::string split = "train";
    double fraction = 1.0;
    std::uint64_t seed = 0;
    bool crop28 = false;
    std::string out;
};

int cmd_dataset_sample(const DatasetOpts& o, const std::vector<std::string>& argv) {
    const DatasetSlice slice = sample_slice(o.root, o.split, o.fraction, o.seed);
    std::ostringstream csv;
    csv << "path,label\n";
    std::map<int, std::size_t> per_class;
    for (const auto& e : slice.entries) {
        csv << e.path << "," << e.label << "\n";
        ++per_class[e.label];
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "slice.csv").string(), csv.str());
    RunManifest m;
    m.command = "dataset sample";
    m.argv = argv;
    m.config = slice_config(slice);
    m.inputs["slice"] = slice_digest(slice);
    write_manifest(o.out, m);
    std::cout << "dataset sample: " << slice.entries.size() << " recordings";
    for (const auto& [label, n] : per_class) std::cout << " " << label << ":" << n;
    std::cout << "\n";
    return 0;
}

int cmd_dataset_cache(const DatasetOpts& o, const std::vector<std::string>& argv) {
    const DatasetSlice slice = sample_slice(o.root, o.split, o.fraction, o.seed);
    std::vector<Recording> recs(slice.entries.size());
    parallel_for(slice.entries.size(), 0,
                 [&](std::size_t i) { recs[i] = load_entry(slice.entries[i], {o.crop28}); });
    fs::create_directories(o.out);
    const std::string cache = (fs::path(o.out) / "recordings.mhc").string();
    write_recording_cache(cache, recs);
    RunManifest m;
    m.command = "dataset cache";
    m.argv = argv;
    m.config = slice_config(slice);
    m.config["crop28"] = o.crop28;
    m.inputs["slice"] = slice_digest(slice);
    write_manifest(o.out, m);
    std::cout << "dataset cache: " << recs.size() << " recordings -> " << cache << "\n";
    return 0;
}

// ---- synth ----

struct SynthOpts {
    std::string out;
    int train_per_class = 20;
    int test_per_class = 10;
    std::uint64_t seed = 0;
};

int cmd_synth(const SynthOpts& o, const std::vector<std::string>& argv) {
    synth::write_corpus(o.out, o.train_per_class, o.test_per_class, o.seed);
    RunManifest m;
    m.command = "synth";
    m.argv = argv;
    m.config = {{"train_per_class", o.train_per_class},
                {"test_per_class", o.test_per_class},
                {"seed", o.seed}};
    write_manifest(o.out, m);
    std::cout << "synth: wrote " << 10 * (o.train_per_class + o.test_per_class)
              << " recordings under " << o.out << "\n";
    return 0;
}

// ---- train / eval ----

struct NetOpts {
    std::string root;
    std::string split;
    double fraction = 0.1;
    std::uint64_t seed = 0;
    bool crop28 = false;
    std::string radii = "7,3";
    std::string clusters = "32,64";
    std::string pool = "7,1";
    std::string preset_name = "1V_200us";
    std::string kernel = "memristor";
    std::string taus_us = "5000,92000";
    std::size_t kmeans_batch = 1024;
    std::size_t kmeans_iters = 300;
    std::size_t surface_cap = 50000;
    double svc_c = 1.0;
    int svc_degree = 3;
    double svc_gamma = 0.0;
    double svc_coef0 = 0.0;
    int jobs = 0;
    std::string model_path;
    std::string mode = "ideal";
    double multiplier = 1.0;
    std::string hist_metric = "euclidean";
    std::string out;
};

std::vector<LayerConfig> build_layers(const NetOpts& o) {
    const std::vector<int> radii = parse_ints(o.radii);
    const std::vector<int> clusters = parse_ints(o.clusters);
    const std::vector<int> pool = parse_ints(o.pool);
    if (radii.size() != clusters.size() || radii.size() != pool.size())
        throw data_error("--radii, --clusters and --pool must have matching lengths");
    std::vector<double> taus;
    if (o.kernel == "singleexp") taus = parse_doubles(o.taus_us);
    else if (o.kernel != "memristor")
        throw data_error("--kernel must be memristor or singleexp");
    if (o.kernel == "singleexp" && taus.size() != radii.size())
        throw data_error("--taus-us must list one tau per layer");

    std::vector<LayerConfig> layers;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        LayerConfig l;
        l.radius = radii[k];
        l.n_clusters = static_cast<std::size_t>(clusters[k]);
        l.pool_u = pool[k];
        l.preset = o.preset_name;
        l.kernel = o.kernel == "singleexp" ? KernelMode::single_exp(taus[k])
                                           : KernelMode::memristor_ideal();
        layers.push_back(l);
    }
    return layers;
}

HistMetric parse_metric(const std::string& s) {
    if (s == "euclidean") return HistMetric::Euclidean;
    if (s == "bhattacharyya") return HistMetric::Bhattacharyya;
    throw data_error("--hist-metric must be euclidean or bhattacharyya");
}

json eval_to_json(const EvalResult& r) {
    json depths = json::array();
    for (std::size_t d = 0; d < r.depths.size(); ++d)
        depths.push_back({{"depth", d + 1},
                          {"hist_accuracy", r.depths[d].hist_accuracy},
                          {"svc_accuracy", r.depths[d].svc_accuracy},
                          {"empty_features", r.depths[d].empty_features}});
    return json{{"recordings", r.recordings}, {"depths", depths}};
}

int cmd_train(const NetOpts& o, const std::vector<std::string>& argv) {
    const std::string split = o.split.empty() ? "train" : o.split;
    const DatasetSlice slice = sample_slice(o.root, split, o.fraction, sub_seed(o.seed, "dataset"));

    TrainPipelineConfig cfg;
    cfg.layers = build_layers(o);
    cfg.kmeans = {o.kmeans_batch, o.kmeans_iters, 0};
    cfg.svc = {o.svc_c, o.svc_degree, o.svc_gamma, o.svc_coef0};
    cfg.surface_cap = o.surface_cap;
    cfg.seed = sub_seed(o.seed, "train");
    cfg.jobs = o.jobs;
    cfg.load = {o.crop28};

    const NetworkModel model = train_network(slice, cfg);
    fs::create_directories(o.out);
    const std::string model_file = (fs::path(o.out) / "model.bin").string();
    save_model(model_file, model);

    json layers = json::array();
    for (const auto& l : model.layers)
        layers.push_back({{"radius", l.radius},
                          {"clusters", l.n_clusters},
                          {"pool_u", l.pool_u},
                          {"kernel", l.kernel.kind == KernelMode::Kind::SingleExp
                                         ? "singleexp"
                                         : "memristor"},
                          {"tau_us", l.kernel.tau_us},
                          {"preset", l.preset}});
    json summary = {{"layers", layers},
                    {"input_width", model.input_width},
                    {"input_height", model.input_height},
                    {"crop28", model.crop28},
                    {"train_recordings", slice.entries.size()}};
    write_json_file((fs::path(o.out) / "model_summary.json").string(), summary);

    RunManifest m;
    m.command = "train";
    m.argv = argv;
    m.config = summary;
    m.config["dataset"] = slice_config(slice);
    m.config["seeds"] = {{"master", o.seed},
                         {"dataset", sub_seed(o.seed, "dataset")},
                         {"train", sub_seed(o.seed, "train")}};
    m.config["kmeans"] = {{"batch", o.kmeans_batch}, {"iterations", o.kmeans_iters}};
    m.config["surface_cap"] = o.surface_cap;
    m.inputs["slice"] = slice_digest(slice);
    write_manifest(o.out, m);
    std::cout << "train: model written to " << model_file << "\n";
    return 0;
}

int cmd_eval(const NetOpts& o, const std::vector<std::string>& argv) {
    const NetworkModel model = load_model(o.model_path);
    const std::string split = o.split.empty() ? "test" : o.split;
    const DatasetSlice slice = sample_slice(o.root, split, o.fraction, sub_seed(o.seed, "dataset"));

    const bool noisy = o.mode == "noisy";
    if (!noisy && o.mode != "ideal") throw data_error("--mode must be ideal or noisy");
    const RunMode run = noisy ? RunMode::noisy_run(sub_seed(o.seed, "device-noise"), o.multiplier)
                              : RunMode::ideal();
    const EvalResult result = evaluate_network(model, slice, run, o.jobs, parse_metric(o.hist_metric));

    json metrics = eval_to_json(result);
    metrics["mode"] = o.mode;
    metrics["multiplier"] = noisy ? o.multiplier : 0.0;
    metrics["hist_metric"] = o.hist_metric;
    fs::create_directories(o.out);
    write_json_file((fs::path(o.out) / "metrics.json").string(), metrics);

    RunManifest m;
    m.command = "eval";
    m.argv = argv;
    m.config = metrics;
    m.config["dataset"] = slice_config(slice);
    m.config["seeds"] = {{"master", o.seed},
                         {"dataset", sub_seed(o.seed, "dataset")},
                         {"device-noise", sub_seed(o.seed, "device-noise")}};
    m.inputs["model"] = file_digest(o.model_path);
    m.inputs["slice"] = slice_digest(slice);
    write_manifest(o.out, m);

    for (std::size_t d = 0; d < result.depths.size(); ++d)
        std::cout << "eval depth " << d + 1 << ": hist=" << result.depths[d].hist_accuracy
                  << " svc=" << result.depths[d].svc_accuracy
                  << " empty=" << result.depths[d].empty_features << "\n";
    return 0;
}

// ---- analyze ----

struct AnalyzeOpts {
    std::string model_path;
    std::string root;
    std::string split = "test";
    double fraction = 0.1;
    std::uint64_t seed = 0;
    std::string deltas_ms = "1,2,5,10,20,50,100,200";
    int samples = 20;
    int runs = 1;
    double multiplier = 1.0;
    std::string multipliers = "1,2,5,10";
    int jobs = 0;
    std::string out;
};

int cmd_analyze_mi(const AnalyzeOpts& o, const std::vector<std::string>& argv) {
    const NetworkModel model = load_model(o.model_path);
    const std::vector<double> deltas_ms = parse_doubles(o.deltas_ms);
    std::vector<double> deltas_us;
    for (double d : deltas_ms) deltas_us.push_back(d * 1000.0);

    std::ostringstream csv;
    csv << "run,layer,delta_ms,mi_ideal,mi_noisy,loss\n";
    // median-over-runs summary per (layer, delta)
    std::vector<std::vector<std::vector<double>>> losses(
        model.layers.size(), std::vector<std::vector<double>>(deltas_us.size()));

    for (int run = 0; run < o.runs; ++run) {
        const DatasetSlice slice = sample_slice(
            o.root, o.split, o.fraction, sub_seed(o.seed, "dataset", run));
        const RunMode noisy = RunMode::noisy_run(sub_seed(o.seed, "device-noise", run), 1.0);
        const auto ideal_streams = collect_layer_streams(model, slice, RunMode::ideal(), o.jobs);
        const auto noisy_streams = collect_layer_streams(model, slice, noisy, o.jobs);
        const MiConfig mi_cfg{o.samples, sub_seed(o.seed, "mi-draws", run)};
        for (std::size_t k = 0; k < model.layers.size(); ++k) {
            const auto pol = static_cast<std::uint16_t>(model.layers[k].n_clusters);
            const std::vector<double> ci = mi_curve(ideal_streams[k], pol, deltas_us, mi_cfg, o.jobs);
            const std::vector<double> cn = mi_curve(noisy_streams[k], pol, deltas_us, mi_cfg, o.jobs);
            const std::vector<double> loss = mi_loss(ci, cn);
            for (std::size_t d = 0; d < deltas_us.size(); ++d) {
                csv << run << "," << k + 1 << "," << fmt(deltas_ms[d]) << "," << fmt(ci[d]) << ","
                    << fmt(cn[d]) << "," << fmt(loss[d]) << "\n";
                losses[k][d].push_back(loss[d]);
            }
        }
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "mi.csv").string(), csv.str());

    json summary = json::array();
    for (std::size_t k = 0; k < model.layers.size(); ++k)
        for (std::size_t d = 0; d < deltas_us.size(); ++d)
            summary.push_back({{"layer", k + 1},
                               {"delta_ms", deltas_ms[d]},
                               {"median_loss", median(losses[k][d])}});
    write_json_file((fs::path(o.out) / "mi_summary.json").string(), summary);

    RunManifest m;
    m.command = "analyze mi";
    m.argv = argv;
    m.config = {{"deltas_ms", deltas_ms}, {"samples", o.samples}, {"runs", o.runs},
                {"seed", o.seed},         {"split", o.split},     {"fraction", o.fraction}};
    m.inputs["model"] = file_digest(o.model_path);
    write_manifest(o.out, m);
    std::cout << "analyze mi: wrote " << (fs::path(o.out) / "mi.csv").string() << "\n";
    return 0;
}

int cmd_analyze_dislocation(const AnalyzeOpts& o, const std::vector<std::string>& argv) {
    const NetworkModel model = load_model(o.model_path);
    std::ostringstream csv;
    csv << "run,layer,dislocation\n";
    std::vector<std::vector<double>> per_layer(model.layers.size());
    for (int run = 0; run < o.runs; ++run) {
        const DatasetSlice slice = sample_slice(
            o.root, o.split, o.fraction, sub_seed(o.seed, "dataset", run));
        const std::vector<double> d = dislocation_run(
            model, slice, sub_seed(o.seed, "device-noise", run), o.multiplier, o.jobs);
        for (std::size_t k = 0; k < d.size(); ++k) {
            csv << run << "," << k + 1 << "," << fmt(d[k]) << "\n";
            per_layer[k].push_back(d[k]);
        }
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "dislocation.csv").string(), csv.str());
    json summary = json::array();
    for (std::size_t k = 0; k < per_layer.size(); ++k)
        summary.push_back({{"layer", k + 1}, {"median_dislocation", median(per_layer[k])}});
    write_json_file((fs::path(o.out) / "dislocation_summary.json").string(), summary);

    RunManifest m;
    m.command = "analyze dislocation";
    m.argv = argv;
    m.config = {{"runs", o.runs},
                {"seed", o.seed},
                {"split", o.split},
                {"fraction", o.fraction},
                {"multiplier", o.multiplier}};
    m.inputs["model"] = file_digest(o.model_path);
    write_manifest(o.out, m);
    std::cout << "analyze dislocation: wrote "
              << (fs::path(o.out) / "dislocation.csv").string() << "\n";
    return 0;
}

int cmd_sweep_noise(const AnalyzeOpts& o, const std::vector<std::string>& argv) {
    const NetworkModel model = load_model(o.model_path);
    const std::vector<double> multipliers = parse_doubles(o.multipliers);
    std::ostringstream csv;
    csv << "run,multiplier,depth,hist_accuracy,svc_accuracy,empty_features\n";
    for (int run = 0; run < o.runs; ++run) {
        const DatasetSlice slice = sample_slice(
            o.root, o.split, o.fraction, sub_seed(o.seed, "dataset", run));
        const auto points = noise_sweep(model, slice, sub_seed(o.seed, "device-noise", run),
                                        multipliers, o.jobs);
        for (const auto& p : points)
            for (std::size_t d = 0; d < p.eval.depths.size(); ++d)
                csv << run << "," << fmt(p.multiplier) << "," << d + 1 << ","
                    << fmt(p.eval.depths[d].hist_accuracy) << ","
                    << fmt(p.eval.depths[d].svc_accuracy) << ","
                    << p.eval.depths[d].empty_features << "\n";
    }
    fs::create_directories(o.out);
    write_text_file((fs::path(o.out) / "sweep.csv").string(), csv.str());

    RunManifest m;
    m.command = "sweep noise";
    m.argv = argv;
    m.config = {{"multipliers", multipliers},
                {"runs", o.runs},
                {"seed", o.seed},
                {"split", o.split},
                {"fraction", o.fraction}};
    m.inputs["model"] = file_digest(o.model_path);
    write_manifest(o.out, m);
    std::cout << "sweep noise: wrote " << (fs::path(o.out) / "sweep.csv").string() << "\n";
    return 0;
}

int run_cli(const std::vector<std::string>& args, int depth) {
    CLI::App app{"memhots: memristive time-surface simulator and HOTS pipeline"};
    app.require_subcommand(1);

    SimulateOpts sim;
    auto* simulate = app.add_subcommand("simulate",
                                        "simulate a device's conductance for a pulse schedule");
    simulate->add_option("--preset", sim.preset_name, "device preset name");
    simulate->add_option("--schedule", sim.schedule, "CSV of WRITE pulse times (header t_us)")
        ->required();
    simulate->add_option("--mode", sim.mode, "ideal|noisy");
    simulate->add_option("--seed", sim.seed, "master seed");
    simulate->add_option("--multiplier", sim.multiplier, "noise std-dev multiplier");
    simulate->add_option("--sample-every-us", sim.sample_every_us, "read sampling period");
    simulate->add_option("--until-us", sim.until_us, "end of the read window (0 = auto)");
    simulate->add_option("--sampling", sim.sampling, "per-pulse|per-device parameter draws");
    simulate->add_option("--out", sim.out, "output directory")->required();

    FitOpts fit;
    auto* fit_cmd = app.add_subcommand("fit", "fit device parameters from relaxation traces");
    fit_cmd->add_option("--trace", fit.traces, "trace CSV file (repeatable)");
    fit_cmd->add_option("--trace-manifest", fit.manifest_csv,
                        "CSV file,onset_us,width_us per trace");
    fit_cmd->add_option("--onset-us", fit.onset_us, "pulse onset for all --trace files");
    fit_cmd->add_option("--width-us", fit.width_us, "pulse width for all --trace files");
    fit_cmd->add_option("--peak-reference", fit.peak_reference,
                        "normalization peak (0 = group mean)");
    fit_cmd->add_flag("--no-normalize", fit.no_normalize, "fit the traces as-is");
    fit_cmd->add_option("--jobs", fit.jobs, "worker threads (0 = cores)");
    fit_cmd->add_option("--out", fit.out, "output directory")->required();

    DatasetOpts ds;
    auto* dataset = app.add_subcommand("dataset", "dataset utilities");
    dataset->require_subcommand(1);
    auto* ds_sample = dataset->add_subcommand("sample", "sample a reproducible slice");
    auto* ds_cache = dataset->add_subcommand("cache", "decode a slice into a binary cache");
    for (auto* sub : {ds_sample, ds_cache}) {
        sub->add_option("--dataset-root", ds.root, "dataset root directory")->required();
        sub->add_option("--split", ds.split, "train|test");
        sub->add_option("--fraction", ds.fraction, "fraction of each class in (0,1]");
        sub->add_option("--seed", ds.seed, "sampling seed");
        sub->add_flag("--crop28", ds.crop28, "center-crop recordings to 28x28 (cache only)");
        sub->add_option("--out", ds.out, "output directory")->required();
    }

    SynthOpts synth_opts;
    auto* synth_cmd =
        app.add_subcommand("synth", "write a synthetic AER corpus (smoke runs, demos)");
    synth_cmd->add_option("--out", synth_opts.out, "corpus root directory")->required();
    synth_cmd->add_option("--train-per-class", synth_opts.train_per_class, "");
    synth_cmd->add_option("--test-per-class", synth_opts.test_per_class, "");
    synth_cmd->add_option("--seed", synth_opts.seed, "");

    NetOpts net;
    auto* train = app.add_subcommand("train", "train codebooks and classifiers");
    auto* eval = app.add_subcommand("eval", "evaluate a trained model");
    for (auto* sub : {train, eval}) {
        sub->add_option("--dataset-root", net.root, "dataset root directory")->required();
        sub->add_option("--split", net.split, "dataset split (train for train, test for eval)");
        sub->add_option("--fraction", net.fraction, "fraction of each class");
        sub->add_option("--seed", net.seed, "master seed");
        sub->add_option("--jobs", net.jobs, "worker threads (0 = cores)");
        sub->add_option("--out", net.out, "output directory")->required();
    }
    train->add_flag("--crop28", net.crop28, "center-crop inputs to 28x28");
    train->add_option("--radii", net.radii, "per-layer neighborhood radii");
    train->add_option("--clusters", net.clusters, "per-layer cluster counts");
    train->add_option("--pool", net.pool, "per-layer pooling factors (1 = none)");
    train->add_option("--preset", net.preset_name, "device preset");
    train->add_option("--kernel", net.kernel, "memristor|singleexp");
    train->add_option("--taus-us", net.taus_us, "per-layer taus for --kernel singleexp");
    train->add_option("--kmeans-batch", net.kmeans_batch, "mini-batch size");
    train->add_option("--kmeans-iters", net.kmeans_iters, "mini-batch iterations");
    train->add_option("--surface-cap", net.surface_cap, "training surface pool per layer");
    train->add_option("--svc-c", net.svc_c, "SVC soft-margin C");
    train->add_option("--svc-degree", net.svc_degree, "SVC polynomial degree");
    train->add_option("--svc-gamma", net.svc_gamma, "SVC kernel gamma (0 = 1/dim)");
    train->add_option("--svc-coef0", net.svc_coef0, "SVC kernel coef0");
    eval->add_option("--model", net.model_path, "trained model file")->required();
    eval->add_option("--mode", net.mode, "ideal|noisy");
    eval->add_option("--multiplier", net.multiplier, "noise std-dev multiplier");
    eval->add_option("--hist-metric", net.hist_metric, "euclidean|bhattacharyya");

    AnalyzeOpts an;
    auto* analyze = app.add_subcommand("analyze", "mutual information and dislocation reports");
    analyze->require_subcommand(1);
    auto* an_mi = analyze->add_subcommand("mi", "per-window mutual information, Ideal vs Noisy");
    auto* an_dis = analyze->add_subcommand("dislocation", "cluster dislocation, Ideal vs Noisy");
    auto* sweep = app.add_subcommand("sweep", "parameter sweeps");
    auto* sweep_noise = sweep->add_subcommand("noise", "accuracy across noise multipliers");
    sweep->require_subcommand(1);
    for (auto* sub : {an_mi, an_dis, sweep_noise}) {
        sub->add_option("--model", an.model_path, "trained model file")->required();
        sub->add_option("--dataset-root", an.root, "dataset root directory")->required();
        sub->add_option("--split", an.split, "dataset split");
        sub->add_option("--fraction", an.fraction, "fraction of each class");
        sub->add_option("--seed", an.seed, "master seed");
        sub->add_option("--runs", an.runs, "independent runs (fresh slice + noise each)");
        sub->add_option("--jobs", an.jobs, "worker threads (0 = cores)");
        sub->add_option("--out", an.out, "output directory")->required();
    }
    an_mi->add_option("--deltas-ms", an.deltas_ms, "window sizes in ms");
    an_mi->add_option("--samples", an.samples, "reference draws per recording");
    an_dis->add_option("--multiplier", an.multiplier, "noise std-dev multiplier");
    sweep_noise->add_option("--multipliers", an.multipliers, "noise std-dev multipliers");

    std::string replay_path;
    auto* replay = app.add_subcommand("replay", "re-run a command from its manifest");
    replay->add_option("manifest", replay_path, "manifest.json path")->required();

    std::vector<const char*> argv;
    argv.push_back("memhots");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (simulate->parsed()) return cmd_simulate(sim, args);
    if (fit_cmd->parsed()) return cmd_fit(fit, args);
    if (dataset->parsed()) {
        if (ds_sample->parsed()) return cmd_dataset_sample(ds, args);
        return cmd_dataset_cache(ds, args);
    }
    if (synth_cmd->parsed()) return cmd_synth(synth_opts, args);
    if (train->parsed()) return cmd_train(net, args);
    if (eval->parsed()) return cmd_eval(net, args);
    if (analyze->parsed()) {
        if (an_mi->parsed()) return cmd_analyze_mi(an, args);
        return cmd_analyze_dislocation(an, args);
    }
    if (sweep->parsed()) return cmd_sweep_noise(an, args);
    if (replay->parsed()) {
        if (depth > 0) throw data_error("replay: nested replay is not allowed");
        const RunManifest m = read_manifest(replay_path);
        return run_cli(m.argv, depth + 1);
    }
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run_cli(args, 0);
    } catch (const convergence_error& e) {
        std::cerr << "error (non-convergence): " << e.what() << "\n";
        return 3;
    } catch (const data_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
