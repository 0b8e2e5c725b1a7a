#pragma once

#include "vixexp/model.hpp"
#include "vixexp/moments.hpp"

namespace vixexp {

// ln VIX^2_{T,P} ~ N(mu_p, sigma_p^2).
struct ProxyParams {
    double mu_p = 0.0;
    double sigma_p = 0.0;
    double x_p = 0.0;          // mu_p/2 + sigma_p^2/8
    double sigma_tilde = 0.0;  // sigma_p / sqrt(T)
    double T = 0.0;

    static ProxyParams make(double mu_p, double sigma_p, double T);
    void check() const;
};

struct GammaCoefficients {
    double gamma1 = 0.0, gamma2 = 0.0, gamma3 = 0.0;
    double delta_sum = 0.0;  // gamma1/2 + gamma2/4 + gamma3/8

    static GammaCoefficients make(double g1, double g2, double g3);
    double operator[](int i) const { return i == 0 ? gamma1 : i == 1 ? gamma2 : gamma3; }
};

ProxyParams proxy_from_moments(const UnitMoments& um, double vol, double T);
GammaCoefficients gammas_from_moments(const UnitMoments& um, double vol);

ProxyParams proxy_params(const SingleModel& m, const VixContract& c, const QuadSpec& q = {});
GammaCoefficients gamma_coeffs(const SingleModel& m, const VixContract& c, const QuadSpec& q = {});

struct ProxyPrices {
    double call, put, future;
    double call0, put0, future0;
};

ProxyPrices proxy_prices(const ProxyParams& p, const GammaCoefficients& g, const VixContract& c);
double iv_expansion(const ProxyParams& p, const GammaCoefficients& g, const VixContract& c);

}  // namespace vixexp
