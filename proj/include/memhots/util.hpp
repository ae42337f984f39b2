#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace memhots {

inline constexpr const char* kVersion = "0.1.0";

// Runs fn(0..n-1) on a worker pool. jobs <= 0 uses the hardware thread
// count. Results must be written to per-index slots; completion order is
// unspecified but slot placement makes reductions deterministic.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

// FNV-1a over a file's bytes, as a hex string. Used for input digests in
// run manifests.
std::string file_digest(const std::string& path);
std::string bytes_digest(const void* data, std::size_t size);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

} // namespace memhots
