#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "memhots/dataset_synth.hpp"
#include "memhots/events.hpp"
#include "memhots/rng.hpp"
#include "support/temp_dir.hpp"

using namespace memhots;
using memhots::testing::TempDir;

TEST_CASE("decode: documented bit patterns") {
    SUBCASE("all-zero record") {
        const std::uint8_t bytes[5] = {0, 0, 0, 0, 0};
        const Recording rec = decode_nmnist(bytes);
        REQUIRE(rec.events.size() == 1);
        CHECK(rec.events[0] == Event{0, 0, 0, 0});
    }
    SUBCASE("max-field record") {
        const std::uint8_t bytes[5] = {0x05, 0x07, 0xFF, 0xFF, 0xFF};
        const Recording rec = decode_nmnist(bytes);
        REQUIRE(rec.events.size() == 1);
        CHECK(rec.events[0].x == 5);
        CHECK(rec.events[0].y == 7);
        CHECK(rec.events[0].p == 1);
        CHECK(rec.events[0].t_us == (1 << 23) - 1);
    }
    SUBCASE("out-of-range coordinate is a format error") {
        const std::uint8_t bytes[5] = {0x12, 0x34, 0x80, 0x00, 0x01}; // y = 52
        CHECK_THROWS_AS(decode_nmnist(bytes), data_error);
    }
    SUBCASE("truncated record is a format error") {
        const std::uint8_t bytes[7] = {0, 0, 0, 0, 0, 1, 1};
        CHECK_THROWS_AS(decode_nmnist(std::span(bytes, 7)), data_error);
    }
}

TEST_CASE("decode sorts by timestamp, stably") {
    // Two events out of order plus two with equal timestamps.
    std::vector<std::uint8_t> bytes = {
        10, 10, 0x00, 0x10, 0x00, // t = 4096
        11, 11, 0x00, 0x00, 0x10, // t = 16
        12, 12, 0x00, 0x00, 0x10, // t = 16, after the (11,11) one
    };
    const Recording rec = decode_nmnist(bytes);
    REQUIRE(rec.events.size() == 3);
    CHECK(rec.events[0].x == 11);
    CHECK(rec.events[1].x == 12); // stable order kept for the tie
    CHECK(rec.events[2].x == 10);
}

TEST_CASE("encode: overflow and range errors") {
    Recording rec;
    rec.events.push_back({std::int64_t{1} << 23, 1, 1, 0});
    CHECK_THROWS_AS(encode_nmnist(rec), data_error);
    rec.events[0] = {0, 40, 1, 0};
    CHECK_THROWS_AS(encode_nmnist(rec), data_error);
    rec.events[0] = {0, 1, 1, 3}; // polarity needs more than one bit
    CHECK_THROWS_AS(encode_nmnist(rec), data_error);
}

TEST_CASE("encode/decode round-trip on random recordings") {
    RngStream rng(314);
    for (int trial = 0; trial < 20; ++trial) {
        Recording rec;
        std::int64_t t = 0;
        const int n = 1 + static_cast<int>(rng.next_u64() % 500);
        for (int i = 0; i < n; ++i) {
            t += static_cast<std::int64_t>(rng.next_u64() % 1000);
            rec.events.push_back({t, static_cast<std::uint16_t>(rng.next_u64() % 34),
                                  static_cast<std::uint16_t>(rng.next_u64() % 34),
                                  static_cast<std::uint16_t>(rng.next_u64() % 2)});
        }
        const Recording back = decode_nmnist(encode_nmnist(rec));
        REQUIRE(back.events.size() == rec.events.size());
        CHECK(back.events == rec.events);
        // byte-level identity too
        CHECK(encode_nmnist(back) == encode_nmnist(rec));
    }
}

TEST_CASE("center crop 28x28 shifts and filters") {
    Recording rec;
    rec.events = {{0, 3, 3, 0}, {1, 2, 10, 1}, {2, 30, 30, 1}, {3, 31, 5, 0}};
    const Recording c = center_crop_28(rec);
    CHECK(c.width == 28);
    CHECK(c.height == 28);
    REQUIRE(c.events.size() == 2);
    CHECK(c.events[0] == Event{0, 0, 0, 0});
    CHECK(c.events[1] == Event{2, 27, 27, 1});
}

TEST_CASE("synthetic corpus: slicing, determinism, corpus-wide invariants") {
    TempDir dir("corpus");
    synth::write_corpus(dir.str(), 6, 3, 99);

    SUBCASE("fraction=1 takes every file") {
        const DatasetSlice all = sample_slice(dir.str(), "train", 1.0, 0);
        CHECK(all.entries.size() == 60);
    }
    SUBCASE("sampling is deterministic and balanced") {
        const DatasetSlice a = sample_slice(dir.str(), "train", 0.5, 7);
        const DatasetSlice b = sample_slice(dir.str(), "train", 0.5, 7);
        REQUIRE(a.entries.size() == b.entries.size());
        for (std::size_t i = 0; i < a.entries.size(); ++i) {
            CHECK(a.entries[i].path == b.entries[i].path);
            CHECK(a.entries[i].label == b.entries[i].label);
        }
        std::map<int, int> per_class;
        for (const auto& e : a.entries) ++per_class[e.label];
        for (const auto& [label, n] : per_class) CHECK(n == 3);
        const DatasetSlice c = sample_slice(dir.str(), "train", 0.5, 8);
        bool any_different = false;
        for (std::size_t i = 0; i < c.entries.size(); ++i)
            any_different = any_different || c.entries[i].path != a.entries[i].path;
        CHECK(any_different);
    }
    SUBCASE("missing class directory is a dataset error") {
        std::filesystem::remove_all(std::filesystem::path(dir.str()) / "Test" / "4");
        CHECK_THROWS_AS(sample_slice(dir.str(), "test", 1.0, 0), data_error);
    }
    SUBCASE("round-trip byte identity and stream invariants over the corpus") {
        const DatasetSlice all = sample_slice(dir.str(), "train", 1.0, 0);
        for (const auto& entry : all.entries) {
            std::ifstream in(entry.path, std::ios::binary);
            const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                                  std::istreambuf_iterator<char>());
            const Recording rec = decode_nmnist(bytes);
            CHECK(encode_nmnist(rec) == bytes);
            for (std::size_t i = 1; i < rec.events.size(); ++i)
                REQUIRE(rec.events[i].t_us >= rec.events[i - 1].t_us);
            for (const Event& ev : rec.events) REQUIRE(ev.p <= 1);
        }
    }
}

TEST_CASE("recording cache round-trips") {
    TempDir dir("cache");
    std::vector<Recording> recs;
    for (int digit = 0; digit < 3; ++digit)
        recs.push_back(synth::make_recording(digit, RngStream(5).split(digit)));
    const std::string path = (dir.path() / "recs.mhc").string();
    write_recording_cache(path, recs);
    const std::vector<Recording> back = read_recording_cache(path);
    REQUIRE(back.size() == recs.size());
    for (std::size_t i = 0; i < recs.size(); ++i) {
        CHECK(back[i].label == recs[i].label);
        CHECK(back[i].events == recs[i].events);
        CHECK(back[i].width == recs[i].width);
    }
    CHECK_THROWS_AS(read_recording_cache((dir.path() / "missing.mhc").string()), data_error);
}
