#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "twa/config.hpp"

namespace twa::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // comparison failed or I/O error
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

struct RunOverrides {
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> engine;
};

/// Loads a TOML file, or the resolved configuration embedded in a
/// .meta.json file, and applies the overrides.
RunConfig resolve_config(const std::string& path, const RunOverrides& overrides);

/// Output file names for a configuration.
std::string twa_csv_path(const RunConfig& config);
std::string oracle_csv_path(const RunConfig& config);
std::string meta_path(const RunConfig& config);

std::uint64_t fnv1a(const std::string& text);

int cmd_run(const std::string& config_path, const RunOverrides& overrides, std::ostream& out,
            std::ostream& err);

struct CompareOptions {
  double tolerance = 0.05;
  std::string json_path;  // "-" prints the JSON report to `out`
};

int cmd_compare(const std::string& csv_a, const std::string& csv_b, const CompareOptions& options,
                std::ostream& out, std::ostream& err);

int cmd_dump_eom(const std::string& config_path, bool json, std::ostream& out, std::ostream& err);

}  // namespace twa::cli
