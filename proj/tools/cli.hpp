#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confls::cli {

inline constexpr const char* kToolVersion = "0.1.0";
/// Relative output paths are resolved under this directory when it is set.
inline constexpr const char* kOutDirEnv = "CONFLS_OUT_DIR";

enum ExitCode : int { kSuccess = 0, kUsage = 1, kDataError = 2, kNumericalAbort = 3 };

/// Runs one command. `args` excludes the program name, e.g.
/// {"gen-data", "--classes", "3", ...}.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confls::cli
