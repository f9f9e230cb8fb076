#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pancake::cli {

enum ExitCode : int {
    kOk = 0,         // success, or inside the zone
    kNegative = 1,   // outside the zone
    kUsage = 2,      // bad flags, unreadable or malformed input
    kSizeCap = 3,    // a desk-scale cap was exceeded
    kInvariant = 4,  // an internal guarantee failed
};

/// Runs one command line (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pancake::cli
