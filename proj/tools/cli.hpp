#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glassform::cli {

enum ExitCode : int {
    kOk = 0,
    kValidation = 1,
    kNotConverged = 2,
    kUsage = 64,
};

/// Runs one command line (args excludes the program name). Output files are
/// written where the command's flags say; messages go to out / err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glassform::cli
