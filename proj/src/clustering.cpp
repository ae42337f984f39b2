#include "memhots/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "memhots/rng.hpp"

namespace memhots {

namespace {

double sq_dist(const double* a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

// k-means++: first centroid uniform, the rest drawn with probability
// proportional to the squared distance to the nearest chosen centroid.
Codebook seed_plus_plus(const SampleMatrix& samples, std::size_t n, RngStream& rng) {
    Codebook cb;
    cb.n = n;
    cb.dim = samples.dim;
    cb.centroids.resize(n * samples.dim);

    std::vector<double> d2(samples.count, 0.0);
    const std::size_t first = static_cast<std::size_t>(rng.next_u64() % samples.count);
    std::memcpy(cb.centroid(0), samples.row(first), samples.dim * sizeof(double));
    for (std::size_t i = 0; i < samples.count; ++i)
        d2[i] = sq_dist(samples.row(i), cb.centroid(0), samples.dim);

    for (std::size_t k = 1; k < n; ++k) {
        double total = 0.0;
        for (double v : d2) total += v;
        if (total <= 0.0)
            throw data_error("fit_minibatch: fewer than " + std::to_string(n) +
                             " distinct samples for k-means++ seeding");
        const double target = rng.next_double() * total;
        double acc = 0.0;
        std::size_t pick = samples.count - 1;
        for (std::size_t i = 0; i < samples.count; ++i) {
            acc += d2[i];
            if (acc >= target) {
                pick = i;
                break;
            }
        }
        std::memcpy(cb.centroid(k), samples.row(pick), samples.dim * sizeof(double));
        for (std::size_t i = 0; i < samples.count; ++i)
            d2[i] = std::min(d2[i], sq_dist(samples.row(i), cb.centroid(k), samples.dim));
    }
    return cb;
}

} // namespace

namespace {

Codebook fit_minibatch_once(const SampleMatrix& samples, std::size_t n, const KMeansConfig& cfg,
                            std::uint64_t init_index) {
    RngStream init_rng = RngStream(cfg.seed).split("kmeans++").split(init_index);
    RngStream batch_rng = RngStream(cfg.seed).split("batches").split(init_index);

    Codebook cb = seed_plus_plus(samples, n, init_rng);
    std::vector<std::uint64_t> counts(n, 0);
    std::vector<std::size_t> batch(std::min(cfg.batch_size, samples.count));
    std::vector<std::size_t> members(batch.size());

    for (std::size_t it = 0; it < cfg.iterations; ++it) {
        for (std::size_t& b : batch) b = static_cast<std::size_t>(batch_rng.next_u64() % samples.count);
        // Assignments against the pre-update centroids, then sequential
        // per-centroid gradient steps with 1/count rates.
        for (std::size_t s = 0; s < batch.size(); ++s)
            members[s] = assign(cb, samples.row(batch[s]), samples.dim);
        for (std::size_t s = 0; s < batch.size(); ++s) {
            const std::size_t k = members[s];
            const double* x = samples.row(batch[s]);
            double* c = cb.centroid(k);
            const double eta = 1.0 / static_cast<double>(++counts[k]);
            for (std::size_t i = 0; i < samples.dim; ++i) c[i] += eta * (x[i] - c[i]);
        }
        // Reseed any centroid that has never been hit from the batch point
        // farthest from its nearest centroid.
        for (std::size_t k = 0; k < n; ++k) {
            if (counts[k] != 0) continue;
            double worst = -1.0;
            std::size_t pick = batch[0];
            for (std::size_t b : batch) {
                const std::size_t near = assign(cb, samples.row(b), samples.dim);
                const double d = sq_dist(samples.row(b), cb.centroid(near), samples.dim);
                if (d > worst) {
                    worst = d;
                    pick = b;
                }
            }
            std::memcpy(cb.centroid(k), samples.row(pick), samples.dim * sizeof(double));
            counts[k] = 1;
        }
    }
    return cb;
}

} // namespace

Codebook fit_minibatch(const SampleMatrix& samples, std::size_t n, const KMeansConfig& cfg) {
    if (n < 1) throw data_error("fit_minibatch: cluster count must be >= 1");
    if (samples.count < n)
        throw data_error("fit_minibatch: " + std::to_string(samples.count) +
                         " samples for " + std::to_string(n) + " clusters");
    const std::size_t n_init = std::max<std::size_t>(cfg.n_init, 1);

    // Fixed evaluation subset for comparing inits.
    RngStream eval_rng = RngStream(cfg.seed).split("init-eval");
    SampleMatrix eval;
    eval.dim = samples.dim;
    const std::size_t eval_count = std::min<std::size_t>(samples.count, 4096);
    eval.data.reserve(eval_count * eval.dim);
    for (std::size_t i = 0; i < eval_count; ++i) {
        const std::size_t pick = static_cast<std::size_t>(eval_rng.next_u64() % samples.count);
        eval.data.insert(eval.data.end(), samples.row(pick), samples.row(pick) + samples.dim);
        ++eval.count;
    }

    Codebook best;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t r = 0; r < n_init; ++r) {
        Codebook cb = fit_minibatch_once(samples, n, cfg, r);
        const double obj = kmeans_objective(cb, eval);
        if (obj < best_obj) {
            best_obj = obj;
            best = std::move(cb);
        }
    }
    return best;
}

std::size_t assign(const Codebook& cb, const double* v, std::size_t dim) {
    if (dim != cb.dim) throw data_error("assign: dimension mismatch");
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < cb.n; ++k) {
        const double d = sq_dist(cb.centroid(k), v, dim);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

std::size_t assign(const Codebook& cb, const std::vector<double>& v) {
    return assign(cb, v.data(), v.size());
}

double kmeans_objective(const Codebook& cb, const SampleMatrix& samples) {
    if (samples.count == 0) throw data_error("kmeans_objective: empty sample set");
    double acc = 0.0;
    for (std::size_t i = 0; i < samples.count; ++i) {
        const std::size_t k = assign(cb, samples.row(i), samples.dim);
        acc += sq_dist(samples.row(i), cb.centroid(k), samples.dim);
    }
    return acc / static_cast<double>(samples.count);
}

double dislocation(const AssignmentTrace& a, const AssignmentTrace& b) {
    if (a.size() != b.size()) throw data_error("dislocation: trace length mismatch");
    if (a.empty()) return 0.0;
    std::size_t diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++diff;
    return static_cast<double>(diff) / static_cast<double>(a.size());
}

namespace {
constexpr std::uint32_t kCodebookMagic = 0x4D48434B; // "MHCK"
constexpr std::uint32_t kCodebookVersion = 1;
} // namespace

void write_codebook(const std::string& path, const Codebook& cb) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write codebook: " + path);
    const std::uint64_t n = cb.n, dim = cb.dim;
    out.write(reinterpret_cast<const char*>(&kCodebookMagic), sizeof(kCodebookMagic));
    out.write(reinterpret_cast<const char*>(&kCodebookVersion), sizeof(kCodebookVersion));
    out.write(reinterpret_cast<const char*>(&n), sizeof(n));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(cb.centroids.data()),
              static_cast<std::streamsize>(cb.centroids.size() * sizeof(double)));
}

Codebook read_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open codebook: " + path);
    std::uint32_t magic = 0, version = 0;
    std::uint64_t n = 0, dim = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof(magic));
    in.read(reinterpret_cast<char*>(&version), sizeof(version));
    in.read(reinterpret_cast<char*>(&n), sizeof(n));
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    if (!in || magic != kCodebookMagic) throw data_error("codebook: bad header in " + path);
    if (version != kCodebookVersion) throw data_error("codebook: unsupported version in " + path);
    Codebook cb;
    cb.n = n;
    cb.dim = dim;
    cb.centroids.resize(n * dim);
    in.read(reinterpret_cast<char*>(cb.centroids.data()),
            static_cast<std::streamsize>(cb.centroids.size() * sizeof(double)));
    if (!in) throw data_error("codebook: truncated file " + path);
    return cb;
}

void write_codebook_csv(const std::string& path, const Codebook& cb) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write codebook csv: " + path);
    out.precision(17);
    out << "cluster";
    for (std::size_t i = 0; i < cb.dim; ++i) out << ",c" << i;
    out << "\n";
    for (std::size_t k = 0; k < cb.n; ++k) {
        out << k;
        for (std::size_t i = 0; i < cb.dim; ++i) out << "," << cb.centroid(k)[i];
        out << "\n";
    }
}

} // namespace memhots
