#include "vixexp/smile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vixexp/blackscholes.hpp"
#include "vixexp/error.hpp"
#include "vixexp/single.hpp"

namespace vixexp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// IV from an out-of-the-money price; NaN with flag when the price leaves the arbitrage band.
SmilePoint invert(double T, double k, double F, double call, double put) {
    double x = std::log(F);
    bool use_call = k >= x;
    try {
        double iv = implied_vol(use_call ? call : put, x, k, T, use_call ? OptionKind::call : OptionKind::put);
        return {T, k, F, iv, false};
    } catch (const Error& e) {
        if (e.code() != Errc::arbitrage && e.code() != Errc::no_convergence) throw;
        return {T, k, F, kNaN, true};
    }
}

std::vector<double> strikes_for(const std::vector<double>& grid, double F,
                                const std::optional<std::vector<double>>& ks) {
    if (ks) return *ks;
    std::vector<double> out;
    for (double m : grid) out.push_back(std::log(F) + m);
    return out;
}

std::vector<SmilePoint> single_smile(const SingleModel& m, const std::string& method, double T, const GridOpts& g,
                                     const std::optional<std::vector<double>>& ks_in) {
    VixContract c{T, kVixWindow, 0.0};
    auto um = unit_moments(m.kernel.kind, m.kernel.decay, m.curve, c);
    auto pp = proxy_from_moments(um, m.kernel.vol, T);
    auto gm = gammas_from_moments(um, m.kernel.vol);
    double F = proxy_prices(pp, gm, c).future;
    std::vector<SmilePoint> out;
    for (double k : strikes_for(g.moneyness, F, ks_in)) {
        c.k = k;
        if (method == "expansion") {
            out.push_back({T, k, F, iv_expansion(pp, gm, c), false});
        } else {
            // the weak approximation of a single kernel is the corrected proxy price
            auto pr = proxy_prices(pp, gm, c);
            out.push_back(invert(T, k, F, pr.call, pr.put));
        }
    }
    return out;
}

std::vector<SmilePoint> mixed_smile(const MixedModel& m, const std::string& method, double T, const GridOpts& g,
                                    const std::optional<std::vector<double>>& ks_in) {
    VixContract c{T, kVixWindow, 0.0};
    auto p = mixed_proxy_params(m, c);
    std::vector<SmilePoint> out;
    if (method == "weak-approx") {
        double F = weak_approx(p, 0.0, Payoff::future).price();
        for (double k : strikes_for(g.moneyness, F, ks_in))
            out.push_back(
                invert(T, k, F, weak_approx(p, k, Payoff::call).price(), weak_approx(p, k, Payoff::put).price()));
        return out;
    }
    int j = g.component ? g.component : default_component(p);
    auto layer = component_layer(p, 0.0, j, g.N);
    double F = hermite_prices(layer, p, c, j, g.boundary).future;
    for (double k : strikes_for(g.moneyness, F, ks_in)) {
        c.k = k;
        layer.k = k;
        layer.A = root_A(p, k);
        auto hp = hermite_prices(layer, p, c, j, g.boundary);
        if (method == "expansion") {
            auto th = theta_and_coords(layer, p, c, j, hp.future);
            out.push_back({T, k, F, iv_expansion_mixed(layer, p, c, j, th, hp), false});
        } else {
            out.push_back(invert(T, k, F, hp.call, hp.put));
        }
    }
    return out;
}

}  // namespace

std::vector<SmilePoint> method_smile(const AnyModel& m, const std::string& method, double T, const GridOpts& g,
                                     const std::optional<std::vector<double>>& ks) {
    if (std::find(kMethods.begin(), kMethods.end(), method) == kMethods.end())
        throw Error(Errc::usage, "unknown method '" + method + "' (expansion, hermite, weak-approx, reference)");
    if (method == "reference") {
        auto rows = ks ? reference_smile(m, {T}, *ks, StrikeGrid::log_strike, g.mc, g.quad_nodes)
                       : reference_smile(m, {T}, g.moneyness, StrikeGrid::log_moneyness, g.mc, g.quad_nodes);
        std::vector<SmilePoint> out;
        for (auto& r : rows) out.push_back({T, r.k, r.F_ref, r.iv_ref, r.flag});
        return out;
    }
    if (auto s = std::get_if<SingleModel>(&m)) return single_smile(*s, method, T, g, ks);
    return mixed_smile(std::get<MixedModel>(m), method, T, g, ks);
}

}  // namespace vixexp
