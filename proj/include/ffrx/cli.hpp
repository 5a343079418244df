#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ffrx {

inline constexpr const char* kCliVersion = "0.1.0";

/// Runs the command-line tool on the given arguments (program name excluded)
/// and returns the process exit code: 0 on success, 2 for flag/usage errors,
/// 3 for numeric or budget failures, 4 for file I/O failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ffrx
