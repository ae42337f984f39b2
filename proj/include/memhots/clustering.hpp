#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "memhots/errors.hpp"

namespace memhots {

// Learned cluster centroids for one layer, stored row-major (n x dim).
struct Codebook {
    std::vector<double> centroids;
    std::size_t n = 0;
    std::size_t dim = 0;

    const double* centroid(std::size_t k) const { return centroids.data() + k * dim; }
    double* centroid(std::size_t k) { return centroids.data() + k * dim; }
};

struct KMeansConfig {
    std::size_t batch_size = 1024;
    std::size_t iterations = 300;
    std::uint64_t seed = 0;
    std::size_t n_init = 3; // independent seedings; best objective wins
};

// Flat sample pool, row-major (count x dim).
struct SampleMatrix {
    std::vector<double> data;
    std::size_t count = 0;
    std::size_t dim = 0;

    const double* row(std::size_t i) const { return data.data() + i * dim; }
    void push_row(const std::vector<double>& v) {
        data.insert(data.end(), v.begin(), v.end());
        ++count;
    }
};

// Mini-batch k-means with k-means++ seeding. Deterministic under seed:
// batches are drawn from a dedicated substream and updates are applied in
// sample order with per-centroid 1/count learning rates. Centroids that
// never received a point are reseeded from the farthest point of the
// current batch.
Codebook fit_minibatch(const SampleMatrix& samples, std::size_t n, const KMeansConfig& cfg);

// Nearest centroid by Euclidean distance; ties break toward the lowest
// index. Throws on dimension mismatch.
std::size_t assign(const Codebook& cb, const double* v, std::size_t dim);
std::size_t assign(const Codebook& cb, const std::vector<double>& v);

// Mean within-cluster squared distance over a sample set.
double kmeans_objective(const Codebook& cb, const SampleMatrix& samples);

// Per-event cluster indices for one recording under one condition; -1 marks
// an event whose surface was empty-flagged (possible only with noise).
using AssignmentTrace = std::vector<std::int32_t>;

// Fraction of positions where two traces disagree (a sentinel on one side
// only counts as disagreement). Throws on length mismatch.
double dislocation(const AssignmentTrace& a, const AssignmentTrace& b);

void write_codebook(const std::string& path, const Codebook& cb);
Codebook read_codebook(const std::string& path);
void write_codebook_csv(const std::string& path, const Codebook& cb);

} // namespace memhots
