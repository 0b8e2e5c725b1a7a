#include "vixexp/single.hpp"

#include <cmath>

#include "vixexp/blackscholes.hpp"
#include "vixexp/error.hpp"

namespace vixexp {

ProxyParams ProxyParams::make(double mu_p, double sigma_p, double T) {
    if (!(T > 0.0)) throw Error(Errc::domain, "T must be positive");
    if (!(sigma_p >= 0.0)) throw Error(Errc::domain, "sigma_p must be non-negative");
    return {mu_p, sigma_p, mu_p / 2.0 + sigma_p * sigma_p / 8.0, sigma_p / std::sqrt(T), T};
}

void ProxyParams::check() const {
    auto r = make(mu_p, sigma_p, T);
    if (std::abs(r.x_p - x_p) > 1e-14 * std::max(1.0, std::abs(x_p)) ||
        std::abs(r.sigma_tilde - sigma_tilde) > 1e-14 * std::max(1.0, sigma_tilde))
        throw Error(Errc::domain, "inconsistent proxy parameters");
}

GammaCoefficients GammaCoefficients::make(double g1, double g2, double g3) {
    return {g1, g2, g3, g1 / 2.0 + g2 / 4.0 + g3 / 8.0};
}

ProxyParams proxy_from_moments(const UnitMoments& um, double vol, double T) {
    double v2 = vol * vol;
    return ProxyParams::make(um.L - 0.5 * v2 * um.m0, vol * std::sqrt(um.s0sq), T);
}

GammaCoefficients gammas_from_moments(const UnitMoments& um, double vol) {
    double v2 = vol * vol, v4 = v2 * v2;
    return GammaCoefficients::make(v4 * um.a2 / 8.0 + v2 * (um.m0 - um.s0sq) / 2.0, -v4 * um.ac / 2.0,
                                   v4 * um.c2 / 2.0);
}

ProxyParams proxy_params(const SingleModel& m, const VixContract& c, const QuadSpec& q) {
    m.kernel.validate();
    return proxy_from_moments(unit_moments(m.kernel.kind, m.kernel.decay, m.curve, c, q), m.kernel.vol, c.T);
}

GammaCoefficients gamma_coeffs(const SingleModel& m, const VixContract& c, const QuadSpec& q) {
    m.kernel.validate();
    return gammas_from_moments(unit_moments(m.kernel.kind, m.kernel.decay, m.curve, c, q), m.kernel.vol);
}

ProxyPrices proxy_prices(const ProxyParams& p, const GammaCoefficients& g, const VixContract& c) {
    BsInputs in{p.x_p, c.k, p.sigma_tilde / 2.0, c.T};
    ProxyPrices r{};
    r.call0 = call_price(in);
    r.put0 = put_price(in);
    r.future0 = std::exp(p.x_p);
    r.call = r.call0;
    r.put = r.put0;
    double scale = 0.5;
    for (int i = 1; i <= 3; ++i, scale *= 0.5) {
        r.call += scale * g[i - 1] * dx_call(i, in);
        r.put += scale * g[i - 1] * dx_put(i, in);
    }
    r.future = r.future0 * (1.0 + g.delta_sum);
    return r;
}

double iv_expansion(const ProxyParams& p, const GammaCoefficients& g, const VixContract& c) {
    double st = p.sigma_tilde, T = c.T;
    if (!(st > 0.0)) throw Error(Errc::degenerate_vol, "sigma_tilde must be positive");
    return st / 2.0 + g.gamma2 / (2.0 * st * T) + 3.0 * g.gamma3 / (8.0 * st * T) -
           g.gamma3 * (p.x_p - c.k) / (st * st * st * T * T);
}

}  // namespace vixexp
