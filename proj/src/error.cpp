#include "vixexp/error.hpp"

#include <sstream>

namespace vixexp {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::domain: return "domain";
        case Errc::bracket: return "bracket";
        case Errc::degenerate_vol: return "degenerate-vol";
        case Errc::unsupported_order: return "unsupported-order";
        case Errc::arbitrage: return "arbitrage";
        case Errc::curve_domain: return "curve-domain";
        case Errc::constant_h: return "constant-h";
        case Errc::order_too_high: return "order-too-high";
        case Errc::degenerate_component: return "degenerate-component";
        case Errc::wrong_pricer: return "wrong-pricer";
        case Errc::covariance_conditioning: return "covariance-conditioning";
        case Errc::matching_infeasible: return "matching-infeasible";
        case Errc::futures_unattainable: return "futures-unattainable";
        case Errc::no_convergence: return "no-convergence";
        case Errc::parse: return "parse";
        case Errc::empty_chain: return "empty-chain";
        case Errc::family: return "family";
        case Errc::io: return "io";
        case Errc::usage: return "usage";
    }
    return "unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

static std::string bracket_msg(double lo, double hi, double flo, double fhi) {
    std::ostringstream os;
    os.precision(17);
    os << "no sign change on [" << lo << ", " << hi << "]: f(lo)=" << flo << ", f(hi)=" << fhi;
    return os.str();
}

BracketError::BracketError(double lo_, double hi_, double flo, double fhi)
    : Error(Errc::bracket, bracket_msg(lo_, hi_, flo, fhi)), lo(lo_), hi(hi_), f_lo(flo), f_hi(fhi) {}

int exit_code(Errc c) {
    switch (c) {
        case Errc::usage:
        case Errc::family:
            return 2;
        case Errc::parse:
        case Errc::empty_chain:
        case Errc::io:
        case Errc::curve_domain:
            return 3;
        default:
            return 4;
    }
}

}  // namespace vixexp
