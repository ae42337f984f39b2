#include <doctest.h>

#include <cmath>
#include <vector>

#include "memhots/time_surface.hpp"

using namespace memhots;

namespace {
MemristorGrid make_grid(KernelMode mode, std::uint16_t dim = 34, std::uint16_t pol = 2) {
    return MemristorGrid(dim, dim, pol, preset("1V_200us"), mode);
}

std::size_t cell(int radius, std::uint16_t p, int dy, int dx) {
    const std::size_t side = 2 * static_cast<std::size_t>(radius) + 1;
    return p * side * side + static_cast<std::size_t>(dy + radius) * side +
           static_cast<std::size_t>(dx + radius);
}
} // namespace

TEST_CASE("drive touches exactly one device") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    grid.drive({1000, 5, 6, 1});
    int active = 0;
    for (std::uint16_t y = 0; y < 34; ++y)
        for (std::uint16_t x = 0; x < 34; ++x)
            for (std::uint16_t p = 0; p < 2; ++p)
                if (grid.read_device(x, y, p, 2000.0) > 0.0) ++active;
    CHECK(active == 1);
    CHECK(grid.read_device(5, 6, 1, 2000.0) > 0.0);
}

TEST_CASE("same pixel, same polarity accumulates (STP); other polarity does not") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    grid.drive({0, 5, 5, 0});
    grid.drive({30000, 5, 5, 0});
    // peak above a fresh device's a1+a2 proves a positive baseline
    CHECK(grid.read_device(5, 5, 0, 30200.0) > 1.07);
    CHECK(grid.read_device(5, 5, 1, 30200.0) == 0.0);
}

TEST_CASE("out-of-range events are rejected") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    CHECK_THROWS_AS(grid.drive({0, 34, 0, 0}), data_error);
    CHECK_THROWS_AS(grid.drive({0, 0, 0, 2}), data_error);
}

TEST_CASE("single event surface: center 1, all else 0") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    const Event ev{5000, 10, 12, 1};
    grid.drive(ev);
    const TimeSurface surf = grid.sample_surface(ev, 1);
    REQUIRE(!surf.empty);
    REQUIRE(surf.values.size() == 3 * 3 * 2);
    for (std::size_t i = 0; i < surf.values.size(); ++i) {
        if (i == cell(1, 1, 0, 0)) CHECK(surf.values[i] == 1.0);
        else CHECK(surf.values[i] == 0.0);
    }
}

TEST_CASE("two-event neighborhood: pinned relaxation value") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    grid.drive({0, 5, 5, 1});
    const Event ev{50000, 6, 5, 1};
    grid.drive(ev);
    const TimeSurface surf = grid.sample_surface(ev, 1);
    REQUIRE(!surf.empty);
    CHECK(surf.values[cell(1, 1, 0, 0)] == 1.0);
    const double expected =
        (0.57 * std::exp(-49.8 / 5.0) + 0.5 * std::exp(-49.8 / 92.0)) / 1.07;
    CHECK(surf.values[cell(1, 1, 0, -1)] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(surf.values[cell(1, 1, 0, -1)] == doctest::Approx(0.272).epsilon(2e-3));
    // the other polarity block is empty
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) CHECK(surf.values[cell(1, 0, dy, dx)] == 0.0);
}

TEST_CASE("single-exponential kernel: no memory, pinned neighbor value") {
    MemristorGrid grid = make_grid(KernelMode::single_exp(5000.0));
    grid.drive({0, 5, 5, 1});
    const Event ev{50000, 6, 5, 1};
    grid.drive(ev);
    const TimeSurface surf = grid.sample_surface(ev, 1);
    CHECK(surf.values[cell(1, 1, 0, 0)] == 1.0);
    CHECK(surf.values[cell(1, 1, 0, -1)] ==
          doctest::Approx(std::exp(-49.8 / 5.0)).epsilon(1e-9));

    // no state carry-over: a burst of pulses leaves the peak at exactly 1
    MemristorGrid burst = make_grid(KernelMode::single_exp(5000.0));
    for (int i = 0; i < 5; ++i) burst.drive({i * 1000, 3, 3, 0});
    CHECK(burst.read_device(3, 3, 0, 4000.0 + 200.0) == 1.0);
}

TEST_CASE("single-exp kernel equals the one-pulse restricted memristor kernel") {
    ParamDistributions restricted = preset("1V_200us");
    restricted.std = ParamStd{};
    restricted.mean.a1 = 1.0;
    restricted.mean.a2 = 0.0;
    restricted.mean.tau1_us = 5000.0;
    restricted.mean.tau2_us = 10000.0; // inert: a2 = 0
    restricted.mean.eta_sigma = 0.0;

    MemristorGrid mem(8, 8, 1, restricted, KernelMode::memristor_ideal());
    MemristorGrid sexp(8, 8, 1, preset("1V_200us"), KernelMode::single_exp(5000.0));
    const Event ev{0, 4, 4, 0};
    mem.drive(ev);
    sexp.drive(ev);
    for (double t = 0.0; t < 40000.0; t += 313.0) {
        const double a = mem.read_device(4, 4, 0, t);
        const double b = sexp.read_device(4, 4, 0, t);
        CHECK(std::abs(a - b) <= 1e-6 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("translation equivariance") {
    const std::vector<Event> events = {
        {0, 10, 10, 0}, {20000, 11, 10, 0}, {40000, 11, 11, 1}, {60000, 12, 11, 0}};
    auto run = [&](int sx, int sy) {
        MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
        TimeSurface last;
        for (Event ev : events) {
            ev.x = static_cast<std::uint16_t>(ev.x + sx);
            ev.y = static_cast<std::uint16_t>(ev.y + sy);
            grid.drive(ev);
            last = grid.sample_surface(ev, 2);
        }
        return last.values;
    };
    const auto base = run(0, 0), shifted = run(7, -3);
    REQUIRE(base.size() == shifted.size());
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i] == shifted[i]);
}

TEST_CASE("time-shift invariance (deterministic kernel)") {
    const std::vector<Event> events = {
        {1000, 10, 10, 0}, {21000, 11, 10, 1}, {41000, 11, 11, 1}};
    auto run = [&](std::int64_t shift) {
        MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
        TimeSurface last;
        for (Event ev : events) {
            ev.t_us += shift;
            grid.drive(ev);
            last = grid.sample_surface(ev, 2);
        }
        return last.values;
    };
    const auto base = run(0), shifted = run(1234567);
    for (std::size_t i = 0; i < base.size(); ++i) CHECK(base[i] == shifted[i]);
}

TEST_CASE("normalization bounds and the L2 option") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    std::vector<Event> events;
    for (int i = 0; i < 6; ++i) events.push_back({i * 9000, static_cast<std::uint16_t>(8 + i % 3),
                                                  static_cast<std::uint16_t>(8 + i / 3), 0});
    TimeSurface surf;
    for (const Event& ev : events) {
        grid.drive(ev);
        surf = grid.sample_surface(ev, 3);
        for (double v : surf.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
        CHECK(*std::max_element(surf.values.begin(), surf.values.end()) == 1.0);
    }
    grid.reset(0);
    grid.drive(events[0]);
    const TimeSurface l2 = grid.sample_surface(events[0], 3, SurfaceNorm::L2);
    double ss = 0.0;
    for (double v : l2.values) ss += v * v;
    CHECK(ss == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("vanishing-amplitude surface is flagged empty") {
    ParamDistributions tiny = preset("1V_200us");
    tiny.std = ParamStd{};
    tiny.mean.a1 = 5e-13;
    tiny.mean.a2 = 5e-13;
    tiny.mean.eta_sigma = 0.0;
    MemristorGrid grid(8, 8, 1, tiny, KernelMode::memristor_ideal());
    const Event ev{0, 4, 4, 0};
    grid.drive(ev);
    CHECK(grid.sample_surface(ev, 1).empty);
}

TEST_CASE("sampling the surface of an undriven reference event is an error") {
    MemristorGrid grid = make_grid(KernelMode::memristor_ideal());
    CHECK_THROWS_AS(grid.sample_surface({0, 4, 4, 0}, 1), data_error);
}

TEST_CASE("stochastic grids are reproducible per (seed, recording tag)") {
    auto run = [](std::uint64_t tag) {
        MemristorGrid grid = make_grid(KernelMode::memristor_stochastic(42));
        grid.reset(tag);
        std::vector<double> out;
        for (int i = 0; i < 10; ++i) {
            const Event ev{i * 5000, static_cast<std::uint16_t>(10 + i % 2), 10, 0};
            grid.drive(ev);
            const TimeSurface s = grid.sample_surface(ev, 1);
            out.insert(out.end(), s.values.begin(), s.values.end());
        }
        return out;
    };
    const auto a = run(3), b = run(3), c = run(4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) differs = differs || a[i] != c[i];
    CHECK(differs);
}

TEST_CASE("noisy reads hit never-pulsed devices too") {
    MemristorGrid grid = make_grid(KernelMode::memristor_stochastic(7));
    grid.reset(1);
    const Event ev{1000, 10, 10, 0};
    grid.drive(ev);
    const TimeSurface surf = grid.sample_surface(ev, 2);
    int nonzero_background = 0;
    for (std::size_t i = 0; i < surf.values.size(); ++i)
        if (i != 12 && surf.values[i] != 0.0) ++nonzero_background; // 12 = center of block 0
    CHECK(nonzero_background > 20);
}

TEST_CASE("per-device sampling keeps one draw across pulses") {
    ParamDistributions dist = preset("1V_200us");
    dist.std = ParamStd{};
    dist.std.a1 = 0.27; // only a1 varies
    dist.mean.eta_sigma = 0.0;

    auto peaks = [&](ParamSampling sampling) {
        MemristorGrid grid(4, 4, 1, dist, KernelMode::memristor_stochastic(11), sampling);
        grid.reset(9);
        grid.drive({0, 1, 1, 0});
        const double p1 = grid.read_device(1, 1, 0, 200.0);
        grid.drive({50000, 1, 1, 0});
        const double p2 = grid.read_device(1, 1, 0, 50200.0);
        return std::pair(p1, p2);
    };

    const auto [p1, p2] = peaks(ParamSampling::PerDevice);
    const double a1_hat = p1 - 0.5;
    const double predicted = p1 + a1_hat * std::exp(-49.8 / 5.0) + 0.5 * std::exp(-49.8 / 92.0);
    CHECK(p2 == doctest::Approx(predicted).epsilon(1e-12));

    const auto [q1, q2] = peaks(ParamSampling::PerPulse);
    const double q_a1_hat = q1 - 0.5;
    const double q_pred = q1 + q_a1_hat * std::exp(-49.8 / 5.0) + 0.5 * std::exp(-49.8 / 92.0);
    CHECK(q2 != doctest::Approx(q_pred).epsilon(1e-12));
}
