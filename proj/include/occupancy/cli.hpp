#pragma once

#include <ostream>

namespace occupancy::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNotConverged = 3;

// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "OCCUPANCY_CONFIG";

// Subcommands: synth | ingest | cv | train | estimate | report.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace occupancy::cli
