// SPDX-License-Identifier: Apache-2.0 WITH LLVM-exception
// -*- Mode: C++ -*-

/// @file
///
/// The abirift command line, callable in-process.

#ifndef ABIRIFT_TOOLS_CLI_HPP
#define ABIRIFT_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace abirift::cli {

/// Process exit statuses.
enum ExitCode : int {
  exit_compatible = 0,
  exit_usage = 1,
  exit_input_error = 2,
  exit_unknown = 3,
  exit_incompatible = 4,
};

/// Runs one invocation. `args` excludes the program name. Results go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string> &args, std::ostream &out,
        std::ostream &err);

} // namespace abirift::cli

#endif
