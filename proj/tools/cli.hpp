#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace purcell::cli {

/// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kUsage = 2,        // bad flags, config or input data
    kPole = 3,         // Landau pole window or critical point hit
    kQuadrature = 4,   // oracle quadrature or extrapolation failure
    kConvergence = 5,  // fit did not converge
};

/// Runs `purcell <args...>`; args excludes the program name. Curve input
/// named "-" is read from `in`; output named "-" (the default) goes to `out`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace purcell::cli
