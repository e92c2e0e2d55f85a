#pragma once

namespace mvcolor::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationFailure = 1;
inline constexpr int kIoFailure = 2;

/// Environment variable that overrides the worker count of the config file.
/// Explicit --workers flags still win.
inline constexpr const char* kWorkersEnv = "MVCOLOR_WORKERS";

/// Full command line entry point; never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace mvcolor::cli
