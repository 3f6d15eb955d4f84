#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

namespace canouq {

inline constexpr std::string_view kVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// Runs the configured sweep or quantile search and writes the result files
/// under the configured output prefix. Progress and diagnostics go to `log`.
int run_command(const std::filesystem::path& config_path, std::ostream& log);

/// Parses the configuration and checks every moment specification and the
/// model dimension without running anything.
int validate_command(const std::filesystem::path& config_path, std::ostream& out, std::ostream& log);

}  // namespace canouq
