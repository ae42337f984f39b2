#include <doctest.h>

#include <cmath>
#include <vector>

#include "memhots/analysis.hpp"
#include "memhots/rng.hpp"

using namespace memhots;

namespace {
LabeledStream stream_with(int label, std::vector<std::int64_t> times, std::uint16_t polarity) {
    LabeledStream s;
    s.label = label;
    for (std::int64_t t : times) s.events.push_back({t, 0, 0, polarity});
    return s;
}
} // namespace

TEST_CASE("MI: cluster firing iff digit 0 gives the closed-form value") {
    std::vector<LabeledStream> recs;
    for (int cls = 0; cls < 10; ++cls)
        for (int k = 0; k < 5; ++k)
            recs.push_back(cls == 0 ? stream_with(0, {5000, 25000, 60000}, 0)
                                    : stream_with(cls, {}, 0));
    const double mi = mutual_information(recs, 0, 2000.0, {20, 7});
    const double expected = 0.1 * std::log2(10.0) + 0.9 * std::log2(1.0 / 0.9);
    CHECK(mi == doctest::Approx(expected).epsilon(1e-9));
    CHECK(mi == doctest::Approx(0.469).epsilon(1e-3));
}

TEST_CASE("MI: a cluster that always fires carries zero bits") {
    std::vector<LabeledStream> recs;
    for (int cls = 0; cls < 10; ++cls)
        for (int k = 0; k < 4; ++k) recs.push_back(stream_with(cls, {1000, 2000, 3000}, 0));
    CHECK(mutual_information(recs, 0, 5000.0, {20, 7}) == doctest::Approx(0.0));
}

TEST_CASE("MI: a silent cluster carries zero bits") {
    std::vector<LabeledStream> recs;
    for (int cls = 0; cls < 10; ++cls)
        for (int k = 0; k < 2; ++k) recs.push_back(stream_with(cls, {1000}, 0));
    CHECK(mutual_information(recs, 1, 5000.0, {20, 7}) == 0.0);
}

TEST_CASE("MI: errors on undersized classes and bad windows") {
    std::vector<LabeledStream> recs = {stream_with(0, {10}, 0), stream_with(0, {20}, 0),
                                       stream_with(1, {30}, 0)};
    CHECK_THROWS_AS(mutual_information(recs, 0, 100.0, {20, 7}), data_error);
    recs.push_back(stream_with(1, {40}, 0));
    CHECK_THROWS_AS(mutual_information(recs, 0, 0.0, {20, 7}), data_error);
}

TEST_CASE("MI is non-negative and bounded by log2(#classes) on random streams") {
    RngStream rng(33);
    std::vector<LabeledStream> recs;
    for (int cls = 0; cls < 10; ++cls) {
        for (int k = 0; k < 6; ++k) {
            LabeledStream s;
            s.label = cls;
            std::int64_t t = 0;
            const int n = 5 + static_cast<int>(rng.next_u64() % 40);
            for (int i = 0; i < n; ++i) {
                t += 500 + static_cast<std::int64_t>(rng.next_u64() % 20000);
                s.events.push_back({t, 0, 0, static_cast<std::uint16_t>(rng.next_u64() % 4)});
            }
            recs.push_back(std::move(s));
        }
    }
    for (double delta : {500.0, 5000.0, 50000.0}) {
        const std::vector<double> curve = mi_curve(recs, 4, {delta}, {20, 11}, 2);
        CHECK(curve[0] >= 0.0);
        CHECK(curve[0] <= std::log2(10.0));
    }
}

TEST_CASE("MI grows with the window on the one-cluster-per-class fixture") {
    std::vector<LabeledStream> recs;
    for (int cls = 0; cls < 10; ++cls)
        for (int k = 0; k < 5; ++k) {
            std::vector<std::int64_t> times;
            for (int i = 1; i <= 8; ++i) times.push_back(i * 40000 + cls * 1000);
            recs.push_back(stream_with(cls, times, static_cast<std::uint16_t>(cls)));
        }
    const std::vector<double> deltas = {500.0, 2000.0, 10000.0, 40000.0, 160000.0};
    const std::vector<double> curve = mi_curve(recs, 10, deltas, {20, 13}, 2);
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i] >= curve[i - 1] - 1e-12);
}

TEST_CASE("plug-in MI matches the closed form on Bernoulli-structured streams") {
    // Class 0 always fires at t=5000; other classes fire there with p=0.2.
    RngStream rng(101);
    std::vector<LabeledStream> recs;
    const int per_class = 200;
    for (int cls = 0; cls < 10; ++cls)
        for (int k = 0; k < per_class; ++k) {
            const bool fires = cls == 0 || rng.next_double() < 0.2;
            recs.push_back(stream_with(cls, fires ? std::vector<std::int64_t>{5000}
                                                  : std::vector<std::int64_t>{},
                                       0));
        }
    const double mi = mutual_information(recs, 0, 2000.0, {20, 3});
    const double p = 0.2, q = (1.0 + 9.0 * p) / 10.0;
    const double closed =
        0.1 * (std::log2(1.0 / q)) +
        0.9 * (p * std::log2(p / q) + (1.0 - p) * std::log2((1.0 - p) / (1.0 - q)));
    CHECK(std::abs(mi - closed) <= 0.02);
}

TEST_CASE("mi_loss: fractions, sign, undefined points") {
    const std::vector<double> ideal = {1.0, 0.5, 0.0, 2.0};
    const std::vector<double> noisy = {1.0, 0.475, 0.1, 2.2};
    const std::vector<double> loss = mi_loss(ideal, noisy);
    CHECK(loss[0] == 0.0);
    CHECK(loss[1] == doctest::Approx(0.05));
    CHECK(std::isnan(loss[2]));
    CHECK(loss[3] == doctest::Approx(-0.1)); // noisy above ideal: negative loss
    CHECK_THROWS_AS(mi_loss({1.0}, {1.0, 2.0}), data_error);
}
