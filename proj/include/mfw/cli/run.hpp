#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace mfw::cli {

struct CliOptions {
    std::string subcommand;
    std::string validate_target;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<long> threads;
};

// exit codes: 0 success, 1 experiment criteria not met, 2 config error
int run(const CliOptions& opts);

int run_cli(int argc, char** argv);

} // namespace mfw::cli
