#pragma once

#include <array>
#include <optional>
#include <vector>

#include "vixexp/model.hpp"
#include "vixexp/moments.hpp"
#include "vixexp/single.hpp"

namespace vixexp {

// How the correction operators treat the exercise boundary A = h^{-1}(e^{2k}).
//   moving: A is re-solved as mu moves (exact derivatives of the N-th order price, via jets)
//   frozen: A held fixed, which is what the closed c_{i,j} recombination encodes
enum class Boundary { moving, frozen };

enum class Payoff { call, put, future };

// Components are numbered 1 and 2 throughout; arrays are indexed j - 1.
struct MixedProxyParams {
    double L = 0.0;
    double T = 0.0;
    std::array<double, 2> lambda{}, mu{}, sigma{}, x{};
    std::array<GammaCoefficients, 2> gamma{};

    static MixedProxyParams from_moments(const UnitMoments& um, double vol1, double vol2, double lambda, double T);
    double sigma_tilde(int j) const;
    MixedProxyParams shifted(double d1, double d2) const;  // mu_j += d_j
};

MixedProxyParams mixed_proxy_params(const MixedModel& m, const VixContract& c, const QuadSpec& q = {});

// ln h(x), h(x) = sum_j lambda_j exp(mu_j + sigma_j x)
double log_h(const MixedProxyParams& p, double x);
double root_A(const MixedProxyParams& p, double k);

struct LeadingPrices {
    double call, put, future;
};
// E[phi(h(Z))] through the j-form integrand (1 + C_j e^{dsigma_j y})^{1/2}.
LeadingPrices leading_prices(const MixedProxyParams& p, double k, int j, int nodes_per_panel = 20);

struct WeakApprox {
    double main = 0.0;
    double correction = 0.0;
    double price() const { return main + correction; }
};
// Main term plus sum gamma_{i,j} P_{i,j} with the operators applied by central differences in mu.
WeakApprox weak_approx(const MixedProxyParams& p, double k, Payoff payoff, double h = 1e-3);
double weak_approx_price(const MixedModel& m, const VixContract& c, Payoff payoff, const QuadSpec& q = {});

using CCoeffs = std::array<std::array<double, 4>, 2>;  // [j-1][i]
CCoeffs c_coeffs(const MixedProxyParams& p);

struct HermiteLayer {
    int N = 0;
    double k = 0.0;
    double A = 0.0;
    // dw[j-1][n][i] = d^i/dmu_1^i omega_{n,j}
    std::array<std::vector<std::array<double, 4>>, 2> dw;
    CCoeffs c{};
    std::array<double, 2> dsigma{}, lnC{};
};

// Throws order_too_high when N > 25 or when doubling the Gauss-Hermite nodes moves omega_N by more than 1e-6.
HermiteLayer hermite_weights(const MixedProxyParams& p, double k, int N, int gh_nodes = 400);

// Layer for component j only, computed in one quadrature pass; N = 0 picks the optimal order from the same weights.
HermiteLayer component_layer(const MixedProxyParams& p, double k, int j, int N = 0);

struct OrderChoice {
    int N;
    double mse;
};
// Smallest N whose Gaussian-weighted MSE of the truncated g-series is within 1e-6 of the best over 1..N_max.
OrderChoice optimal_order(const MixedProxyParams& p, int j, int N_max = 25);
// Component with the smaller sigma_P among those with positive weight.
int default_component(const MixedProxyParams& p);

struct HermitePrices {
    double call, put, future;
    double call_lead, put_lead, future_lead;  // N-th order main term, no gamma corrections
};
HermitePrices hermite_prices(const HermiteLayer& layer, const MixedProxyParams& p, const VixContract& c, int j,
                             Boundary b = Boundary::moving);

struct ThetaChoice {
    double theta;
    int j;
    double x_theta, k_theta, delta_j;
};
// theta defaults to the optimal choice (1 if delta_j > 0, else 0).
ThetaChoice theta_and_coords(const HermiteLayer& layer, const MixedProxyParams& p, const VixContract& c, int j,
                             double F_P, std::optional<double> theta = std::nullopt);

double iv_expansion_mixed(const HermiteLayer& layer, const MixedProxyParams& p, const VixContract& c, int j,
                          const ThetaChoice& th, Boundary b = Boundary::moving);
// Same, reusing prices already computed on this layer.
double iv_expansion_mixed(const HermiteLayer& layer, const MixedProxyParams& p, const VixContract& c, int j,
                          const ThetaChoice& th, const HermitePrices& hp);
double iv_expansion_extended(const HermiteLayer& layer, const MixedProxyParams& p, const VixContract& c, int j,
                             Boundary b = Boundary::moving);

// One-call expansion at a strike: j = 0 picks default_component, N = 0 picks optimal_order.
struct MixedPoint {
    double iv, call, put, future;
    int j, N;
};
MixedPoint mixed_expansion(const MixedProxyParams& p, const VixContract& c, int j = 0, int N = 0,
                           Boundary b = Boundary::moving);

struct MomentMatch {
    double m1, m2;
    double mu_y, sigma_y;
    KernelSpec kernel;  // matched single kernel
    ProxyParams proxy;
    GammaCoefficients gamma;
    double iv;
};
MomentMatch moment_matched_iv(const MixedModel& m, const VixContract& c, const QuadSpec& q = {});

}  // namespace vixexp
