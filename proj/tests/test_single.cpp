#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "vixexp/blackscholes.hpp"
#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"
#include "vixexp/moments.hpp"
#include "vixexp/single.hpp"

using namespace vixexp;

namespace {

const double kXi = 0.24 * 0.24;

// Plain nested Gauss-Legendre straight from the definitions of the gammas (smooth kernels only).
GammaCoefficients brute_gammas(const KernelSpec& ks, const ForwardVarianceCurve& curve, const VixContract& c, int n) {
    double ev = mean_vix2(curve, c);
    std::vector<double> us, uw;
    for (auto& pc : curve.pieces(c.T, c.T + c.delta)) {
        auto g = gauss_legendre(n, pc.a, pc.b);
        for (std::size_t i = 0; i < g.size(); ++i) {
            us.push_back(g.nodes[i]);
            uw.push_back(g.weights[i] * pc.xi / (ev * c.delta));
        }
    }
    auto tq = gauss_legendre(n, 0.0, c.T);
    std::size_t nt = tq.size(), nu = us.size();
    std::vector<double> kb(nt, 0.0), k2b(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i)
        for (std::size_t a = 0; a < nu; ++a) {
            double K = kernel_eval(ks, us[a], tq.nodes[i]);
            kb[i] += uw[a] * K;
            k2b[i] += uw[a] * K * K;
        }
    double g1a = 0, g1b = 0, g2 = 0, g3 = 0;
    for (std::size_t a = 0; a < nu; ++a) {
        double x = 0, y = 0, z = 0;
        for (std::size_t i = 0; i < nt; ++i) {
            double K = kernel_eval(ks, us[a], tq.nodes[i]);
            x += tq.weights[i] * (K * K - k2b[i]);
            y += tq.weights[i] * kb[i] * (K - kb[i]);
            z += tq.weights[i] * (K - kb[i]) * (K - kb[i]);
        }
        g1a += uw[a] * x * x;
        g1b += uw[a] * z;
        g2 += uw[a] * x * y;
        g3 += uw[a] * y * y;
    }
    return GammaCoefficients::make(g1a / 8 + g1b / 2, -g2 / 2, g3 / 2);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("exponential proxy variance closed form") {
    double w = 2.0, kap = 0.25, T = 1.0 / 12.0, D = kVixWindow;
    SingleModel m{KernelSpec::exponential(w, kap), ForwardVarianceCurve::flat(kXi)};
    VixContract c{T, D, 0.0};
    double f = (1 - std::exp(-kap * D)) / (kap * D);
    double closed = w * w * f * f * (1 - std::exp(-2 * kap * T)) / (2 * kap);
    auto p = proxy_params(m, c);
    CHECK(p.sigma_p * p.sigma_p == doctest::Approx(closed).epsilon(1e-13));
    CHECK(p.sigma_p == doctest::Approx(0.5656).epsilon(1e-4));
    auto p240 = proxy_params(m, c, {240, 240});
    CHECK(p240.sigma_p == doctest::Approx(p.sigma_p).epsilon(1e-13));
    // mu_p = ln E - (1/2) <int K^2>
    double m0 = w * w * (1 - std::exp(-2 * kap * D)) / (2 * kap * D) * (1 - std::exp(-2 * kap * T)) / (2 * kap);
    CHECK(p.mu_p == doctest::Approx(std::log(kXi) - 0.5 * m0).epsilon(1e-13));
    CHECK_NOTHROW(p.check());
    CHECK(p.x_p == doctest::Approx(p.mu_p / 2 + p.sigma_p * p.sigma_p / 8).epsilon(1e-15));
}

TEST_CASE("power-law proxy converges under node doubling") {
    SingleModel m{KernelSpec::power_law(1.0, 0.1), ForwardVarianceCurve::flat(kXi)};
    VixContract c{1.0 / 12.0, kVixWindow, 0.0};
    auto a = proxy_params(m, c, {120, 120});
    auto b = proxy_params(m, c, {240, 240});
    CHECK(std::abs(a.mu_p - b.mu_p) < 1e-8);
    CHECK(std::abs(a.sigma_p - b.sigma_p) < 1e-8);
    auto ga = gamma_coeffs(m, c, {120, 120});
    auto gb = gamma_coeffs(m, c, {240, 240});
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ga[i] - gb[i]) < 1e-8);

    // closed-form m0 for a flat curve
    double H = 0.1, T = c.T, D = c.delta;
    double m0 = (std::pow(T + D, 2 * H + 1) - std::pow(T, 2 * H + 1) - std::pow(D, 2 * H + 1)) / (2 * H * (2 * H + 1) * D);
    CHECK(a.mu_p == doctest::Approx(std::log(kXi) - 0.5 * m0).epsilon(1e-10));
}

TEST_CASE("gammas against brute-force double quadrature") {
    VixContract c{1.0 / 12.0, kVixWindow, 0.0};
    auto ks = KernelSpec::exponential(2.0, 0.25);
    SingleModel m{ks, ForwardVarianceCurve::flat(kXi)};
    auto g = gamma_coeffs(m, c);
    auto o = brute_gammas(ks, m.curve, c, 480);
    for (int i = 0; i < 3; ++i) CHECK(rel(g[i], o[i]) < 1e-8);
    CHECK(g.gamma1 >= 0);
    CHECK(g.gamma3 >= 0);

    // piecewise curve with a break inside the window, faster kernel
    ForwardVarianceCurve step({{0.0, 0.04}, {c.T + 0.03, 0.09}});
    auto ks2 = KernelSpec::exponential(8.0, 10.0);
    SingleModel m2{ks2, step};
    auto g2 = gamma_coeffs(m2, c);
    auto o2 = brute_gammas(ks2, step, c, 480);
    for (int i = 0; i < 3; ++i) CHECK(rel(g2[i], o2[i]) < 1e-8);
    auto p2 = proxy_params(m2, c);
    CHECK(std::isfinite(p2.mu_p));
}

TEST_CASE("serial and parallel moments are bit-identical") {
    VixContract c{0.25, kVixWindow, 0.0};
    ForwardVarianceCurve step({{0.0, 0.04}, {0.27, 0.06}});
    for (auto kind : {KernelKind::exponential, KernelKind::power_law}) {
        auto a = unit_moments(kind, 0.2, step, c, {}, Exec::serial);
        auto b = unit_moments(kind, 0.2, step, c, {}, Exec::parallel);
        CHECK(a.m0 == b.m0);
        CHECK(a.s0sq == b.s0sq);
        CHECK(a.a2 == b.a2);
        CHECK(a.ac == b.ac);
        CHECK(a.c2 == b.c2);
    }
}

TEST_CASE("degenerate limits") {
    SingleModel e{KernelSpec::exponential(2.0, 0.25), ForwardVarianceCurve::flat(kXi)};
    SingleModel r{KernelSpec::power_law(1.0, 0.1), ForwardVarianceCurve::flat(kXi)};
    for (auto* m : {&e, &r}) {
        VixContract c0{1e-12, kVixWindow, 0.0};
        auto p = proxy_params(*m, c0);
        CHECK(p.sigma_p < 1e-3);
        CHECK(p.mu_p == doctest::Approx(std::log(kXi)).epsilon(1e-3));
        auto g = gamma_coeffs(*m, c0);
        for (int i = 0; i < 3; ++i) CHECK(std::abs(g[i]) < 1e-6);
    }
    VixContract cd{1.0 / 12.0, 1e-5, 0.0};
    auto gd = gamma_coeffs(e, cd);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(gd[i]) < 1e-6);

    // rough kernels degenerate slowly: gamma1 ~ Delta^{2H}, gamma2, gamma3 ~ Delta^{4H}
    double H = 0.1;
    auto g6 = gamma_coeffs(r, {1.0 / 12.0, 1e-6, 0.0}, {240, 240});
    auto g7 = gamma_coeffs(r, {1.0 / 12.0, 1e-7, 0.0}, {240, 240});
    CHECK(g7.gamma1 / g6.gamma1 == doctest::Approx(std::pow(10.0, -2 * H)).epsilon(0.05));
    CHECK(g7.gamma2 / g6.gamma2 == doctest::Approx(std::pow(10.0, -4 * H)).epsilon(0.05));
    CHECK(g7.gamma3 / g6.gamma3 == doctest::Approx(std::pow(10.0, -4 * H)).epsilon(0.05));
    // futures tend to sqrt(xi0) as T -> 0
    VixContract c0{1e-10, kVixWindow, std::log(0.2)};
    auto pp = proxy_prices(proxy_params(e, c0), gamma_coeffs(e, c0), c0);
    CHECK(pp.future == doctest::Approx(0.24).epsilon(1e-5));
}

TEST_CASE("proxy prices") {
    auto p = ProxyParams::make(std::log(0.05), 0.3, 0.25);
    VixContract c{0.25, kVixWindow, std::log(0.21)};
    auto z = proxy_prices(p, GammaCoefficients::make(0, 0, 0), c);
    CHECK(z.call == z.call0);
    CHECK(z.put == z.put0);
    CHECK(z.future == doctest::Approx(std::exp(p.x_p)).epsilon(1e-15));
    CHECK(z.call0 == doctest::Approx(call_price({p.x_p, c.k, p.sigma_tilde / 2, c.T})).epsilon(1e-15));

    auto g = GammaCoefficients::make(0.01, -0.004, 0.002);
    CHECK(g.delta_sum == doctest::Approx(0.005 - 0.001 + 0.00025).epsilon(1e-15));
    for (double k : {-2.0, -1.6, -1.4, -1.0}) {
        c.k = k;
        auto pr = proxy_prices(p, g, c);
        CHECK(std::abs((pr.call - pr.put) - (pr.future - std::exp(k))) < 1e-12);
    }
    CHECK_THROWS_AS(proxy_prices(ProxyParams::make(-3, 0.0, 0.25), g, c), Error);
}

TEST_CASE("implied volatility expansion") {
    auto p = ProxyParams::make(std::log(0.05), 0.3, 0.25);
    VixContract c{0.25, kVixWindow, std::log(0.2)};
    CHECK(iv_expansion(p, GammaCoefficients::make(0.02, 0, 0), c) == p.sigma_tilde / 2);

    auto g = GammaCoefficients::make(0.01, -0.004, 0.002);
    double slope = g.gamma3 / (std::pow(p.sigma_tilde, 3) * c.T * c.T);
    double prev = 0;
    for (int i = 0; i < 10; ++i) {
        c.k = std::log(0.2) + 0.05 * i;
        double v = iv_expansion(p, g, c);
        if (i > 0) CHECK((v - prev) / 0.05 == doctest::Approx(slope).epsilon(1e-9));
        prev = v;
    }
}

TEST_CASE("expansion iv matches iv of the corrected proxy price") {
    std::vector<KernelSpec> kernels{KernelSpec::exponential(2.0, 0.25), KernelSpec::exponential(8.0, 10.0),
                                    KernelSpec::power_law(1.0, 0.1), KernelSpec::power_law(1.02, 0.23)};
    for (auto& ks : kernels) {
        SingleModel m{ks, ForwardVarianceCurve::flat(kXi)};
        for (int mo : {1, 3, 6}) {
            VixContract c{mo / 12.0, kVixWindow, 0.0};
            auto um = unit_moments(ks.kind, ks.decay, m.curve, c);
            auto p = proxy_from_moments(um, ks.vol, c.T);
            auto g = gammas_from_moments(um, ks.vol);
            double lnF = std::log(proxy_prices(p, g, c).future);
            for (int i = 0; i < 10; ++i) {
                c.k = lnF - 0.1 + 0.5 * i / 9.0;
                auto pr = proxy_prices(p, g, c);
                double iv = implied_vol(pr.call, lnF, c.k, c.T);
                CHECK(rel(iv_expansion(p, g, c), iv) < 0.01);
            }
        }
    }
}

TEST_CASE("proxy variance matches simulated Gaussian variance") {
    double w = 2.0, kap = 0.25, T = 0.25, D = kVixWindow;
    SingleModel m{KernelSpec::exponential(w, kap), ForwardVarianceCurve::flat(kXi)};
    VixContract c{T, D, 0.0};
    double sp2 = std::pow(proxy_params(m, c).sigma_p, 2);

    const int steps = 100, paths = 20000, nu = 40;
    auto ug = gauss_legendre(nu, T, T + D);
    std::vector<double> kb(steps);
    double h = T / steps;
    for (int i = 0; i < steps; ++i) {
        double t = (i + 0.5) * h;
        kb[i] = ug.integrate([&](double u) { return kernel_eval(m.kernel, u, t); }) / D;
    }
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    double s = 0, s2 = 0;
    for (int p = 0; p < paths; ++p) {
        double y = 0;
        for (int i = 0; i < steps; ++i) y += kb[i] * std::sqrt(h) * nd(rng);
        s += y;
        s2 += y * y;
    }
    double var = s2 / paths - (s / paths) * (s / paths);
    double se = var * std::sqrt(2.0 / paths);
    CHECK(std::abs(var - sp2) < 3 * se);
}
