#pragma once

#include <string>
#include <vector>

namespace vixexp::cli {

// "1m,3m,6m" (months) or "0.25,0.5" (years).
std::vector<double> parse_maturities(const std::string& s);
// "lo:hi:n" or a comma list.
std::vector<double> parse_grid(const std::string& s);

int run(int argc, char** argv);

}  // namespace vixexp::cli
