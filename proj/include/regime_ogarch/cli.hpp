#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ogarch {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitFit = 3,
};

/// `args` excludes the program name.
[[nodiscard]] int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

[[nodiscard]] int cli_main(int argc, char** argv);

}  // namespace ogarch
