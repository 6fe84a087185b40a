#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mfw::io {

inline constexpr const char* kToolVersion = "0.1.0";

struct ExperimentStatus {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunManifest {
    std::string config_path;
    std::string config_hash; // fnv1a64 of the stored config bytes, hex
    std::string tool_version = kToolVersion;
    std::uint64_t seed = 0;
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
    std::vector<ExperimentStatus> experiments;

    bool all_pass() const;
    // written to a temp file and renamed into place
    void write_atomic(const std::string& dir) const;
};

std::string iso_timestamp_now();

} // namespace mfw::io
