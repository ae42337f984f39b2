#pragma once

#include <cstdint>
#include <string>

#include "memhots/events.hpp"
#include "memhots/rng.hpp"

namespace memhots::synth {

// Procedural event-camera-style recording of a digit glyph swept along a
// three-saccade path over a 34x34 sensor: ON events where the glyph covers
// new pixels, OFF events where it leaves them, plus sparse shot noise.
// N-MNIST-compatible in format and scale; intended for pipeline smoke runs
// and demos, not for reproducing dataset-level accuracy figures.
Recording make_recording(int digit, RngStream rng);

// Writes <root>/{Train,Test}/<digit>/*.bin via the AER encoder.
void write_corpus(const std::string& root, int train_per_class, int test_per_class,
                  std::uint64_t seed);

} // namespace memhots::synth
