#include "memhots/manifest.hpp"

#include <filesystem>
#include <fstream>

#include "memhots/errors.hpp"
#include "memhots/util.hpp"

namespace memhots {

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["version"] = kVersion;
    j["command"] = m.command;
    j["argv"] = m.argv;
    j["config"] = m.config;
    j["inputs"] = m.inputs;
    return j.dump(2) + "\n";
}

void write_manifest(const std::string& out_dir, const RunManifest& m) {
    std::filesystem::create_directories(out_dir);
    write_text_file((std::filesystem::path(out_dir) / "manifest.json").string(),
                    manifest_to_json(m));
}

RunManifest read_manifest(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw data_error("manifest " + path + ": " + e.what());
    }
    RunManifest m;
    m.command = j.value("command", "");
    m.argv = j.value("argv", std::vector<std::string>{});
    m.config = j.value("config", nlohmann::json::object());
    m.inputs = j.value("inputs", nlohmann::json::object());
    if (m.argv.empty()) throw data_error("manifest " + path + ": missing argv");
    return m;
}

} // namespace memhots
