// Command-line surface: configuration parsing with overrides, subcommand
// dispatch, CSV emission, and the run manifest.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbcd/harness.hpp"

namespace hbcd::cli {

inline constexpr const char* kToolVersion = "hbcd 1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunManifest {
    std::string subcommand;
    std::string config_digest;
    std::uint64_t seed;
    std::string tool_version;
    std::vector<std::string> output_paths;
};

struct ResolvedRun {
    ExperimentConfig config;
    // extras not covered by ExperimentConfig
    double optimize_alpha = 0.1;
    int optimize_k = 16;
    std::string resolved_json;  // canonical echo of the full config
};

// Accepts numbers or symbolic tokens like "pi/4", "0.7*pi", "-pi/8".
double parse_angle_token(const std::string& token);

// Loads the JSON config (empty path: all defaults), applies dotted-path
// overrides (later wins), validates, and returns the resolved run.
// Throws ConfigError naming the offending key.
ResolvedRun parse_config(const std::string& path,
                         const std::vector<std::string>& overrides);

// Executes a subcommand; writes CSV outputs, the resolved config echo, and
// the manifest under out_dir. Returns the process exit code (0 success,
// 1 in-band computational NotFound, 2 is reserved for config errors and
// produced by the caller).
int run(const std::string& subcommand, ResolvedRun& run, const std::string& out_dir,
        RunManifest* manifest_out = nullptr);

// Full argv entry point used by tools/hbcd.cpp; returns the exit code.
int main_entry(int argc, char** argv);

}  // namespace hbcd::cli
