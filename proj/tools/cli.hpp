#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hflow::cli {

// 0 pass, 1 assertion failure, 2 usage or configuration error,
// 3 violated hypothesis of the underlying theorems.
enum ExitCode : int { exit_pass = 0, exit_fail = 1, exit_usage = 2, exit_hypothesis = 3 };

int run(int argc, char** argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hflow::cli
