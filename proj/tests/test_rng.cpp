#include <doctest.h>

#include <cmath>
#include <set>

#include "memhots/rng.hpp"

using namespace memhots;

TEST_CASE("rng streams are deterministic and split-independent") {
    RngStream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    RngStream parent(7);
    RngStream c1 = parent.split(1), c2 = parent.split(2);
    CHECK(c1.key() != c2.key());
    CHECK(parent.split(1).key() == c1.key());
    CHECK(parent.split("kmeans").key() == parent.split("kmeans").key());
    CHECK(parent.split("kmeans").key() != parent.split("dataset").key());
}

TEST_CASE("uniform doubles stay in [0,1) and look uniform") {
    RngStream rng(123);
    double sum = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double u = rng.next_double();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(std::abs(sum / n - 0.5) < 0.01);
}

TEST_CASE("gaussian draws match the requested moments") {
    RngStream rng(99);
    const int n = 200000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.next_gaussian(2.0, 3.0);
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean - 2.0) < 0.05);
    CHECK(std::abs(var - 9.0) < 0.2);
}

TEST_CASE("zero-sigma gaussian returns the mean exactly") {
    RngStream rng(5);
    for (int i = 0; i < 10; ++i) CHECK(rng.next_gaussian(1.25, 0.0) == 1.25);
}
