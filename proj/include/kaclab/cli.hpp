#pragma once

namespace kaclab::cli {

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "KACLAB_OUTPUT_DIR";

/// Entry point of the `kaclab` tool. Returns 0 on success, 1 on invalid
/// input (including unknown flags) and 2 on numerical failure.
int run(int argc, const char* const* argv);

} // namespace kaclab::cli
