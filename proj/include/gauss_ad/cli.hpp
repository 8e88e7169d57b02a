#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gauss_ad::cli {

// Parses "5%" as 0.05 and a bare number as a fraction; result must lie in (0,1).
double parse_fpr(const std::string& text);

// Entry point of the `gauss_ad` tool. Returns the process exit code:
// 0 success, 1 usage, 2 data, 3 numeric.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gauss_ad::cli
