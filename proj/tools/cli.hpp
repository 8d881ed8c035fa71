#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hawking::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Runs one subcommand; args exclude the program name. Diagnostics go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// FNV-1a 64 of the canonical (sorted-key) config dump, as 16 hex digits.
std::string config_hash(const std::string& canonical);

}  // namespace hawking::cli
