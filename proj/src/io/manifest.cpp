#include "mfw/io/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "mfw/util/error.hpp"

namespace mfw::io {

std::string iso_timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

bool RunManifest::all_pass() const {
    for (const auto& e : experiments)
        if (!e.pass) return false;
    return true;
}

void RunManifest::write_atomic(const std::string& dir) const {
    nlohmann::json j;
    j["config"] = config_path;
    j["config_hash"] = config_hash;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    nlohmann::json exps = nlohmann::json::array();
    for (const auto& e : experiments)
        exps.push_back({{"name", e.name}, {"pass", e.pass}, {"detail", e.detail}});
    j["experiments"] = exps;
    j["all_pass"] = all_pass();

    const std::filesystem::path target = std::filesystem::path(dir) / "manifest.json";
    const std::filesystem::path tmp = target.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw DomainError("cannot write manifest at " + tmp.string());
        out << j.dump(2) << "\n";
    }
    std::filesystem::rename(tmp, target);
}

} // namespace mfw::io
