#include "memhots/dataset_synth.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace fs = std::filesystem;

namespace memhots::synth {

namespace {

// 5x7 digit glyphs, one byte per row, low 5 bits used.
constexpr std::array<std::array<std::uint8_t, 7>, 10> kFont = {{
    {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}, // 0
    {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}, // 1
    {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}, // 2
    {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}, // 3
    {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}, // 4
    {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}, // 5
    {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}, // 6
    {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}, // 7
    {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}, // 8
    {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}, // 9
}};

constexpr int kScale = 2;       // glyph pixels -> sensor pixels
constexpr int kShiftPeriodUs = 12'000;
constexpr int kShiftsPerSaccade = 7;

bool glyph_covers(int digit, int gx, int gy) {
    if (gx < 0 || gy < 0 || gx >= 5 * kScale || gy >= 7 * kScale) return false;
    return (kFont[digit][gy / kScale] >> (4 - gx / kScale)) & 1;
}

struct PixelSet {
    std::array<std::uint64_t, 34> rows{}; // bit x of row y

    void set(int x, int y) {
        if (x >= 0 && x < 34 && y >= 0 && y < 34) rows[y] |= (std::uint64_t{1} << x);
    }
    bool test(int x, int y) const { return (rows[y] >> x) & 1; }
};

PixelSet render(int digit, int ox, int oy) {
    PixelSet s;
    for (int gy = 0; gy < 7 * kScale; ++gy)
        for (int gx = 0; gx < 5 * kScale; ++gx)
            if (glyph_covers(digit, gx, gy)) s.set(ox + gx, oy + gy);
    return s;
}

} // namespace

Recording make_recording(int digit, RngStream rng) {
    if (digit < 0 || digit > 9) throw data_error("synth: digit out of range");
    Recording rec;
    rec.label = digit;

    int ox = 6 + static_cast<int>(rng.next_u64() % 5);
    int oy = 6 + static_cast<int>(rng.next_u64() % 5);
    // Three saccades, like the dataset the format mimics.
    constexpr std::array<std::pair<int, int>, 3> kSaccades = {{{1, 0}, {-1, 1}, {0, -1}}};

    PixelSet prev = render(digit, ox, oy);
    std::int64_t t = 1000;
    for (const auto& [dx, dy] : kSaccades) {
        for (int step = 0; step < kShiftsPerSaccade; ++step) {
            ox += dx;
            oy += dy;
            const PixelSet cur = render(digit, ox, oy);
            for (int y = 0; y < 34; ++y) {
                for (int x = 0; x < 34; ++x) {
                    const bool was = prev.test(x, y), now = cur.test(x, y);
                    if (was == now) continue;
                    Event ev;
                    ev.x = static_cast<std::uint16_t>(x);
                    ev.y = static_cast<std::uint16_t>(y);
                    ev.p = now ? 1 : 0;
                    ev.t_us = t + static_cast<std::int64_t>(rng.next_u64() % 3000);
                    rec.events.push_back(ev);
                }
            }
            // Sensor shot noise, a few random events per shift.
            const int n_noise = static_cast<int>(rng.next_u64() % 3);
            for (int i = 0; i < n_noise; ++i) {
                Event ev;
                ev.x = static_cast<std::uint16_t>(rng.next_u64() % 34);
                ev.y = static_cast<std::uint16_t>(rng.next_u64() % 34);
                ev.p = static_cast<std::uint16_t>(rng.next_u64() % 2);
                ev.t_us = t + static_cast<std::int64_t>(rng.next_u64() % kShiftPeriodUs);
                rec.events.push_back(ev);
            }
            prev = cur;
            t += kShiftPeriodUs;
        }
    }
    std::stable_sort(rec.events.begin(), rec.events.end(),
                     [](const Event& a, const Event& b) { return a.t_us < b.t_us; });
    return rec;
}

void write_corpus(const std::string& root, int train_per_class, int test_per_class,
                  std::uint64_t seed) {
    const RngStream master(seed);
    for (const auto& [split, count] :
         {std::pair<std::string, int>{"Train", train_per_class}, {"Test", test_per_class}}) {
        for (int digit = 0; digit <= 9; ++digit) {
            const fs::path dir = fs::path(root) / split / std::to_string(digit);
            fs::create_directories(dir);
            for (int i = 0; i < count; ++i) {
                RngStream rng = master.split(split).split(digit).split(i);
                const Recording rec = make_recording(digit, rng);
                const std::vector<std::uint8_t> bytes = encode_nmnist(rec);
                std::ostringstream name;
                name << std::setw(5) << std::setfill('0') << i << ".bin";
                std::ofstream out(dir / name.str(), std::ios::binary);
                if (!out) throw data_error("synth: cannot write " + (dir / name.str()).string());
                out.write(reinterpret_cast<const char*>(bytes.data()),
                          static_cast<std::streamsize>(bytes.size()));
            }
        }
    }
}

} // namespace memhots::synth
