#pragma once

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace gmrf::cli {

using Config = nlohmann::json;

inline constexpr const char* kToolVersion = "0.1.0";

struct OutputFile {
  std::string file;  // relative to the output directory
  std::string digest;
};

/// Runs one subcommand on a fully populated config, writes its outputs and
/// manifest.json into `out_dir`, and returns the output digests.
std::vector<OutputFile> run_command(const std::string& command, const Config& config,
                                    const std::filesystem::path& out_dir);

/// Re-runs the command recorded in a manifest into `out_dir` and compares
/// digests. Returns the number of mismatching outputs.
int replay(const std::filesystem::path& manifest, const std::filesystem::path& out_dir);

}  // namespace gmrf::cli
