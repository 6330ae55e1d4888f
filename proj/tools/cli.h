//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_TOOLS_CLI_H_
#define MOLLM_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace mollm::cli {

inline constexpr char kToolkitVersion[] = "0.1.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitInputError = 1,
  kExitInternalError = 2,
};

/// Runs one sub-command. args[0] is the program name. Data goes to out (or
/// to the files named by the flags), JSON-lines log events go to err.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

int run(int argc, const char *const *argv);

}  // namespace mollm::cli

#endif  // MOLLM_TOOLS_CLI_H_
