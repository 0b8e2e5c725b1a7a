#include "vixexp/blackscholes.hpp"

#include <cmath>

#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"

namespace vixexp {

D1D2 d1_d2(const BsInputs& in) {
    double sq = in.sigma * std::sqrt(in.T);
    if (!(sq > 0.0)) throw Error(Errc::degenerate_vol, "sigma*sqrt(T) must be positive");
    double d1 = (in.x - in.k) / sq + 0.5 * sq;
    return {d1, d1 - sq};
}

double call_price(const BsInputs& in) {
    if (!(in.sigma * std::sqrt(std::max(in.T, 0.0)) > 0.0)) return std::max(std::exp(in.x) - std::exp(in.k), 0.0);
    auto d = d1_d2(in);
    return std::exp(in.x) * norm_cdf(d.d1) - std::exp(in.k) * norm_cdf(d.d2);
}

double put_price(const BsInputs& in) {
    if (!(in.sigma * std::sqrt(std::max(in.T, 0.0)) > 0.0)) return std::max(std::exp(in.k) - std::exp(in.x), 0.0);
    auto d = d1_d2(in);
    return std::exp(in.k) * norm_cdf(-d.d2) - std::exp(in.x) * norm_cdf(-d.d1);
}

double bs_price(const BsInputs& in, OptionKind kind) { return kind == OptionKind::call ? call_price(in) : put_price(in); }

double vega(const BsInputs& in) {
    auto d = d1_d2(in);
    return std::exp(in.x) * std::sqrt(in.T) * norm_pdf(d.d1);
}

double vomma(const BsInputs& in) {
    double v = vega(in);
    double m = in.x - in.k;
    return v * (m * m / (in.sigma * in.sigma * in.sigma * in.T) - in.sigma * in.T / 4.0);
}

double dx_call(int i, const BsInputs& in) {
    if (i < 1 || i > 3) throw Error(Errc::unsupported_order, "spatial derivative order must be 1..3");
    auto d = d1_d2(in);
    double ex = std::exp(in.x);
    double sq = in.sigma * std::sqrt(in.T);
    double base = ex * norm_cdf(d.d1);
    if (i == 1) return base;
    double g = ex * norm_pdf(d.d1) / sq;
    if (i == 2) return base + g;
    return base + 2.0 * g - g * d.d1 / sq;
}

double dx_put(int i, const BsInputs& in) { return dx_call(i, in) - std::exp(in.x); }

double implied_vol(double price, double x, double k, double T, OptionKind kind) {
    double F = std::exp(x), K = std::exp(k);
    double lower = kind == OptionKind::call ? std::max(F - K, 0.0) : std::max(K - F, 0.0);
    double upper = kind == OptionKind::call ? F : K;
    if (!(price > lower)) throw Error(Errc::arbitrage, "price at or below intrinsic value");
    if (!(price < upper)) throw Error(Errc::arbitrage, kind == OptionKind::call ? "call price at or above forward" : "put price at or above strike");
    auto f = [&](double s) { return bs_price({x, k, s, T}, kind) - price; };
    double lo = 1e-8, hi = 5.0;
    if (f(lo) > 0) return lo;
    while (f(hi) < 0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e4) throw Error(Errc::no_convergence, "implied vol above 1e4");
    }
    return find_root(f, lo, hi, 1e-15);
}

}  // namespace vixexp
