#ifndef PFBO_CLI_HPP
#define PFBO_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace pfbo::cli {

/// Exit codes: 0 success, 2 usage or validation error, 1 runtime failure.
enum ExitCode : int { kSuccess = 0, kRuntimeError = 1, kUsageError = 2 };

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pfbo::cli

#endif  // PFBO_CLI_HPP
