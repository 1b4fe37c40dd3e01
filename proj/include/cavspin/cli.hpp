#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cavspin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;  ///< usage or input error
inline constexpr int kExitFit = 2;    ///< non-convergence, no signal, rank deficiency

/// Runs one `cavspin` command line (`args` excludes the program name).
/// Reports go to `out` as key=value lines; diagnostics and usage to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cavspin::cli
