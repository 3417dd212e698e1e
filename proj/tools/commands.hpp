#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clickbait::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

/// Runs the `clickbait` command line. `args` excludes the program name.
/// Subcommands: analyze, split, train, predict, evaluate.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clickbait::cli
