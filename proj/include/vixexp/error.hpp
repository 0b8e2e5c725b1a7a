#pragma once

#include <stdexcept>
#include <string>

namespace vixexp {

enum class Errc {
    domain,
    bracket,
    degenerate_vol,
    unsupported_order,
    arbitrage,
    curve_domain,
    constant_h,
    order_too_high,
    degenerate_component,
    wrong_pricer,
    covariance_conditioning,
    matching_infeasible,
    futures_unattainable,
    no_convergence,
    parse,
    empty_chain,
    family,
    io,
    usage,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

// Raised by find_root when f(lo) and f(hi) share a sign.
class BracketError : public Error {
public:
    BracketError(double lo, double hi, double f_lo, double f_hi);
    double lo, hi, f_lo, f_hi;
};

// Process exit code for the CLI: 2 usage, 3 data, 4 numerical.
int exit_code(Errc c);

}  // namespace vixexp
