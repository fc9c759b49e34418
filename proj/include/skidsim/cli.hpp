#pragma once

// `skidsim` command line: run, sweep, compare, tune-protocol, serve, plot.
// Exit codes: 0 success, 1 runtime fault, 2 config or input error.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skidsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFault = 1;
inline constexpr int kExitConfig = 2;

// "1-10", "1,3,5", "1-3,7". Throws ConfigError on malformed input.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Entry point; args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace skidsim::cli
