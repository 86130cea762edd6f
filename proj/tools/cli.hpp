#pragma once

#include <atomic>

namespace iabplace::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Parses argv, runs one subcommand and returns the process exit code.
/// `stop` is polled between episodes (set it from a signal handler).
int run(int argc, char** argv, const std::atomic<bool>* stop = nullptr);

/// Invariant checks behind `selftest`; returns the number of failures.
int run_selftest();

}  // namespace iabplace::cli
