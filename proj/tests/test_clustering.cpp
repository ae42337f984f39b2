#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "memhots/clustering.hpp"
#include "memhots/rng.hpp"
#include "support/temp_dir.hpp"

using namespace memhots;
using memhots::testing::TempDir;

namespace {
SampleMatrix matrix(const std::vector<std::vector<double>>& rows) {
    SampleMatrix m;
    m.dim = rows.front().size();
    for (const auto& r : rows) m.push_row(r);
    return m;
}

// Exact k-means optimum on a tiny instance by enumerating every assignment.
double brute_force_objective(const SampleMatrix& pts, std::size_t n) {
    const std::size_t count = pts.count, dim = pts.dim;
    std::vector<std::size_t> assign_vec(count, 0);
    double best = std::numeric_limits<double>::infinity();
    const std::size_t total = static_cast<std::size_t>(std::pow(double(n), double(count)));
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < count; ++i) {
            assign_vec[i] = c % n;
            c /= n;
        }
        std::vector<double> centroid(n * dim, 0.0);
        std::vector<std::size_t> sizes(n, 0);
        for (std::size_t i = 0; i < count; ++i) {
            ++sizes[assign_vec[i]];
            for (std::size_t d = 0; d < dim; ++d)
                centroid[assign_vec[i] * dim + d] += pts.row(i)[d];
        }
        bool any_empty = false;
        for (std::size_t k = 0; k < n; ++k) {
            if (sizes[k] == 0) {
                any_empty = true;
                continue;
            }
            for (std::size_t d = 0; d < dim; ++d) centroid[k * dim + d] /= double(sizes[k]);
        }
        if (any_empty) continue;
        double obj = 0.0;
        for (std::size_t i = 0; i < count; ++i)
            for (std::size_t d = 0; d < dim; ++d) {
                const double diff = pts.row(i)[d] - centroid[assign_vec[i] * dim + d];
                obj += diff * diff;
            }
        best = std::min(best, obj / double(count));
    }
    return best;
}
} // namespace

TEST_CASE("assign: nearest centroid with low-index ties") {
    Codebook cb;
    cb.n = 2;
    cb.dim = 2;
    cb.centroids = {0, 0, 1, 1};
    CHECK(assign(cb, {0.9, 0.8}) == 1);
    CHECK(assign(cb, {0.5, 0.5}) == 0);
    CHECK(assign(cb, {1.0, 1.0}) == 1);
    CHECK(assign(cb, {0.0, 0.0}) == 0);
    CHECK_THROWS_AS(assign(cb, {1.0, 2.0, 3.0}), data_error);
}

TEST_CASE("fit_minibatch: two well-separated clouds land on the cloud means") {
    RngStream rng(17);
    SampleMatrix pts;
    pts.dim = 2;
    const double centers[2][2] = {{0.0, 0.0}, {10.0, 10.0}};
    for (int i = 0; i < 400; ++i) {
        const int c = i % 2;
        pts.push_row({centers[c][0] + 0.1 * rng.next_gaussian(),
                      centers[c][1] + 0.1 * rng.next_gaussian()});
    }
    const Codebook cb = fit_minibatch(pts, 2, {128, 200, 5});
    // match each centroid to its nearest cloud center
    for (std::size_t k = 0; k < 2; ++k) {
        const double d0 = std::hypot(cb.centroid(k)[0] - 0.0, cb.centroid(k)[1] - 0.0);
        const double d1 = std::hypot(cb.centroid(k)[0] - 10.0, cb.centroid(k)[1] - 10.0);
        CHECK(std::min(d0, d1) < 0.05);
    }
}

TEST_CASE("fit_minibatch: n=1 approaches the dataset mean, deterministically") {
    RngStream rng(23);
    SampleMatrix pts;
    pts.dim = 2;
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double x = rng.next_double(), y = rng.next_double();
        pts.push_row({x, y});
        mx += x / 200.0;
        my += y / 200.0;
    }
    const Codebook a = fit_minibatch(pts, 1, {64, 300, 9});
    const Codebook b = fit_minibatch(pts, 1, {64, 300, 9});
    CHECK(a.centroids == b.centroids);
    CHECK(std::abs(a.centroid(0)[0] - mx) < 0.01);
    CHECK(std::abs(a.centroid(0)[1] - my) < 0.01);
}

TEST_CASE("fit_minibatch: errors") {
    SampleMatrix pts = matrix({{0, 0}, {1, 1}});
    CHECK_THROWS_AS(fit_minibatch(pts, 3, {8, 10, 0}), data_error);
    SampleMatrix dup = matrix({{1, 1}, {1, 1}, {1, 1}});
    CHECK_THROWS_AS(fit_minibatch(dup, 2, {8, 10, 0}), data_error);
}

TEST_CASE("fit_minibatch: held-out objective non-increasing in training length") {
    int improved = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        RngStream rng(RngStream(seed).split("kmeans-epochs").key());
        SampleMatrix train, eval;
        train.dim = eval.dim = 3;
        for (int i = 0; i < 300; ++i) {
            const int c = i % 4;
            std::vector<double> v = {double(c % 2) * 4 + 0.4 * rng.next_gaussian(),
                                     double(c / 2) * 4 + 0.4 * rng.next_gaussian(),
                                     0.4 * rng.next_gaussian()};
            if (i % 5 == 0) eval.push_row(v);
            else train.push_row(v);
        }
        const Codebook early = fit_minibatch(train, 4, {32, 10, seed});
        const Codebook late = fit_minibatch(train, 4, {32, 200, seed});
        if (kmeans_objective(late, eval) <= kmeans_objective(early, eval) * 1.05) ++improved;
    }
    CHECK(improved >= 3); // median over 5 seeds within stochastic tolerance
}

TEST_CASE("assign is scale-covariant with the codebook") {
    RngStream rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        Codebook cb;
        cb.n = 4;
        cb.dim = 3;
        for (int i = 0; i < 12; ++i) cb.centroids.push_back(rng.next_gaussian());
        std::vector<double> v = {rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        const double c = 0.1 + 5.0 * rng.next_double();
        Codebook scaled = cb;
        for (double& x : scaled.centroids) x *= c;
        std::vector<double> sv = v;
        for (double& x : sv) x *= c;
        CHECK(assign(cb, v) == assign(scaled, sv));
    }
}

TEST_CASE("fit_minibatch objective is near the exhaustive-partition optimum") {
    // Tiny clusterable instances (the regime the pipeline feeds it); on
    // structureless uniform points no k-means variant stays within 10% of
    // the exhaustive optimum instance-by-instance.
    RngStream rng(47);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t count = 6 + rng.next_u64() % 5; // 6..10 points
        const std::size_t n = 2 + rng.next_u64() % 2;     // 2..3 clusters
        SampleMatrix pts;
        pts.dim = 2;
        const double centers[3][2] = {{0.0, 0.0}, {4.0, 0.0}, {2.0, 4.0}};
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t g = i % n; // balanced groups
            pts.push_row({centers[g][0] + 0.2 * rng.next_gaussian(),
                          centers[g][1] + 0.2 * rng.next_gaussian()});
        }
        const double best = brute_force_objective(pts, n);
        const Codebook cb = fit_minibatch(pts, n, {16, 400, 7});
        const double got = kmeans_objective(cb, pts);
        CHECK(got <= best * 1.10 + 1e-12);
    }
}

TEST_CASE("dislocation") {
    CHECK(dislocation({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(dislocation({1, 2, 3, 4}, {1, 2, 3, 0}) == 0.25);
    CHECK(dislocation({}, {}) == 0.0);
    CHECK_THROWS_AS(dislocation({1, 2}, {1}), data_error);
}

TEST_CASE("codebook serialization round-trips") {
    TempDir dir("codebook");
    Codebook cb;
    cb.n = 3;
    cb.dim = 4;
    RngStream rng(8);
    for (int i = 0; i < 12; ++i) cb.centroids.push_back(rng.next_gaussian());
    const std::string path = (dir.path() / "cb.bin").string();
    write_codebook(path, cb);
    const Codebook back = read_codebook(path);
    CHECK(back.n == cb.n);
    CHECK(back.dim == cb.dim);
    CHECK(back.centroids == cb.centroids);
    write_codebook_csv((dir.path() / "cb.csv").string(), cb); // smoke
}
