#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace memhots {

// Every CLI run writes <out>/manifest.json: the exact argv (replayable), the
// resolved configuration including every derived seed, the code version, and
// digests of the inputs it consumed. Re-running from a manifest reproduces
// all outputs byte-for-byte, so the manifest carries no timestamps.
struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    nlohmann::json config;
    nlohmann::json inputs; // path -> digest
};

std::string manifest_to_json(const RunManifest& m);
void write_manifest(const std::string& out_dir, const RunManifest& m);
RunManifest read_manifest(const std::string& path);

} // namespace memhots
