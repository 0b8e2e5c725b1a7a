#include "vixexp/mixed.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "vixexp/blackscholes.hpp"
#include "vixexp/error.hpp"
#include "vixexp/jet.hpp"
#include "vixexp/mathcore.hpp"

namespace vixexp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_component(int j) {
    if (j != 1 && j != 2) throw Error(Errc::domain, "component must be 1 or 2");
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// ln C_j and dsigma_j of the j-form integrand (1 + C_j e^{dsigma_j y})^{1/2}.
std::pair<double, double> c_and_dsigma(const MixedProxyParams& p, int j) {
    int a = j - 1, b = 2 - j;
    double ds = p.sigma[b] - p.sigma[a];
    if (p.lambda[b] == 0.0) return {kNegInf, ds};
    double lnc = std::log(p.lambda[b]) - std::log(p.lambda[a]) + p.mu[b] - p.mu[a] + p.sigma[a] * ds / 2.0;
    return {lnc, ds};
}

double prefactor(const MixedProxyParams& p, int j) { return std::sqrt(p.lambda[j - 1]) * std::exp(p.x[j - 1]); }

// g(y) = (1 + C e^{ds y})^{1/2} evaluated in log space
double log_g(double lnc, double ds, double y) { return 0.5 * softplus(lnc + ds * y); }

}  // namespace

MixedProxyParams MixedProxyParams::from_moments(const UnitMoments& um, double vol1, double vol2, double lambda,
                                                double T) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::domain, "lambda must lie in [0, 1]");
    MixedProxyParams p;
    p.L = um.L;
    p.T = T;
    p.lambda = {lambda, 1.0 - lambda};
    double vols[2] = {vol1, vol2};
    for (int j = 0; j < 2; ++j) {
        auto pp = proxy_from_moments(um, vols[j], T);
        p.mu[j] = pp.mu_p;
        p.sigma[j] = pp.sigma_p;
        p.x[j] = pp.x_p;
        p.gamma[j] = gammas_from_moments(um, vols[j]);
    }
    return p;
}

double MixedProxyParams::sigma_tilde(int j) const {
    check_component(j);
    return sigma[j - 1] / std::sqrt(T);
}

MixedProxyParams MixedProxyParams::shifted(double d1, double d2) const {
    MixedProxyParams q = *this;
    q.mu[0] += d1;
    q.mu[1] += d2;
    for (int j = 0; j < 2; ++j) q.x[j] = q.mu[j] / 2.0 + q.sigma[j] * q.sigma[j] / 8.0;
    return q;
}

MixedProxyParams mixed_proxy_params(const MixedModel& m, const VixContract& c, const QuadSpec& q) {
    m.validate();
    auto um = unit_moments(m.k1.kind, m.k1.decay, m.curve, c, q);
    return MixedProxyParams::from_moments(um, m.k1.vol, m.k2.vol, m.lambda, c.T);
}

double log_h(const MixedProxyParams& p, double x) {
    double a = safe_log(p.lambda[0]) + p.mu[0] + p.sigma[0] * x;
    double b = safe_log(p.lambda[1]) + p.mu[1] + p.sigma[1] * x;
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    return log_sum_exp(a, b);
}

double root_A(const MixedProxyParams& p, double k) {
    bool s1 = p.lambda[0] > 0.0 && p.sigma[0] > 0.0, s2 = p.lambda[1] > 0.0 && p.sigma[1] > 0.0;
    if (!s1 && !s2) throw Error(Errc::constant_h, "h is constant: both weighted sigmas vanish");
    // ln h is convex and increasing, so Newton started right of the root descends onto it monotonically
    double x = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 2; ++i)
        if (p.lambda[i] > 0.0 && p.sigma[i] > 0.0)
            x = std::min(x, (2.0 * k - std::log(p.lambda[i]) - p.mu[i]) / p.sigma[i]);
    for (int it = 0; it < 200; ++it) {
        double lh = log_h(p, x), f = lh - 2.0 * k;
        if (f <= 0.0) return x;
        double slope = 0.0;
        for (int i = 0; i < 2; ++i)
            if (p.lambda[i] > 0.0) slope += p.sigma[i] * std::exp(std::log(p.lambda[i]) + p.mu[i] + p.sigma[i] * x - lh);
        double step = f / slope;
        x -= step;
        if (step <= 1e-15 * (1.0 + std::abs(x))) return x;
    }
    throw Error(Errc::no_convergence, "boundary A did not converge");
}

LeadingPrices leading_prices(const MixedProxyParams& p, double k, int j, int nodes_per_panel) {
    check_component(j);
    if (p.lambda[j - 1] <= 0.0) throw Error(Errc::degenerate_component, "component has zero weight");
    double A = root_A(p, k);
    auto [lnc, ds] = c_and_dsigma(p, j);
    double a = A - p.sigma[j - 1] / 2.0;
    double lo = std::min(0.0, ds / 2.0) - 14.0, hi = std::max(0.0, ds / 2.0) + 14.0;
    const auto& g = gauss_legendre_unit(nodes_per_panel);
    auto integrate = [&](double x0, double x1) {
        if (!(x1 > x0)) return 0.0;
        int panels = std::max(1, static_cast<int>(std::ceil(x1 - x0)));
        double w = (x1 - x0) / panels, s = 0.0;
        for (int q = 0; q < panels; ++q)
            for (std::size_t i = 0; i < g.size(); ++i) {
                double y = x0 + w * (q + g.nodes[i]);
                s += w * g.weights[i] * std::exp(log_g(lnc, ds, y) - 0.5 * y * y) * kInvSqrt2Pi;
            }
        return s;
    };
    double pre = prefactor(p, j);
    double upper = integrate(std::max(a, lo), hi);
    double lower = integrate(lo, std::min(a, hi));
    double K = std::exp(k);
    return {pre * upper - K * norm_cdf(-A), K * norm_cdf(A) - pre * lower, pre * (upper + lower)};
}

namespace {

double leading_value(const MixedProxyParams& p, double k, Payoff payoff, int j) {
    auto lp = leading_prices(p, k, j);
    return payoff == Payoff::call ? lp.call : payoff == Payoff::put ? lp.put : lp.future;
}

}  // namespace

WeakApprox weak_approx(const MixedProxyParams& p, double k, Payoff payoff, double h) {
    for (int j = 0; j < 2; ++j)
        if (p.sigma[j] < 1e-6) throw Error(Errc::degenerate_component, "sigma_P below 1e-6: finite differences underflow");
    int jv = default_component(p);
    WeakApprox r;
    r.main = leading_value(p, k, payoff, jv);
    auto ops = [&](double step) {
        std::array<std::array<double, 3>, 2> out{};
        for (int J = 0; J < 2; ++J) {
            double ratio = p.sigma[1 - J] / p.sigma[J];
            auto f = [&](double s, double t) {
                double d[2] = {0.0, 0.0};
                d[J] += s + t;
                d[1 - J] += ratio * t;
                return leading_value(p.shifted(d[0], d[1]), k, payoff, jv);
            };
            double f00 = r.main, fp0 = f(step, 0), fm0 = f(-step, 0);
            double fpp = f(step, step), fpm = f(step, -step), fmp = f(-step, step), fmm = f(-step, -step);
            out[J][0] = (fp0 - fm0) / (2 * step);
            out[J][1] = (fpp - fpm - fmp + fmm) / (4 * step * step);
            out[J][2] = ((fpp - 2 * fp0 + fpm) - (fmp - 2 * fm0 + fmm)) / (2 * step * step * step);
            (void)f00;
        }
        return out;
    };
    auto a = ops(h), b = ops(h / 2);
    for (int J = 0; J < 2; ++J)
        for (int i = 0; i < 3; ++i) r.correction += p.gamma[J][i] * (4.0 * b[J][i] - a[J][i]) / 3.0;
    return r;
}

double weak_approx_price(const MixedModel& m, const VixContract& c, Payoff payoff, const QuadSpec& q) {
    return weak_approx(mixed_proxy_params(m, c, q), c.k, payoff).price();
}

CCoeffs c_coeffs(const MixedProxyParams& p) {
    if (!(p.sigma[0] > 0.0 && p.sigma[1] > 0.0)) throw Error(Errc::degenerate_component, "c coefficients need both sigmas positive");
    const auto& g1 = p.gamma[0];
    const auto& g2 = p.gamma[1];
    double r = p.sigma[1] / p.sigma[0], q = p.sigma[0] / p.sigma[1];
    CCoeffs c{};
    c[0][0] = 1.0 + g1.delta_sum;
    c[1][0] = 1.0 + g2.delta_sum;
    c[0][1] = g1[0] + (1 - r / 2) * g1[1] + (0.75 - r / 2) * g1[2] - (g2[0] + (q / 2) * g2[1] + (q / 2) * (q / 2) * g2[2]);
    c[1][1] = (g1[0] + (r / 2) * g1[1] + (r / 2) * (r / 2) * g1[2]) - g2[0] - (1 - q / 2) * g2[1] - (0.75 - q / 2) * g2[2];
    c[0][2] = (1 - r) * (g1[1] + g1[2]) + 0.5 * (1 - r) * (1 - r) * g1[2] + (1 - q) * (g2[1] + q * g2[2]);
    c[1][2] = (1 - r) * (g1[1] + r * g1[2]) + (1 - q) * (g2[1] + g2[2]) + 0.5 * (1 - q) * (1 - q) * g2[2];
    double c3 = (1 - r) * (1 - r) * g1[2] - (1 - q) * (1 - q) * g2[2];
    c[0][3] = c3;
    c[1][3] = c3;
    return c;
}

namespace {

// Nodes whose Gauss-Hermite weight exceeds 1e-60; the rest contribute below double resolution.
std::pair<std::size_t, std::size_t> live_nodes(const QuadratureRule& gh) {
    std::size_t lo = 0, hi = gh.size();
    while (lo < hi && gh.weights[lo] < 1e-60) ++lo;
    while (hi > lo && gh.weights[hi - 1] < 1e-60) --hi;
    return {lo, hi};
}

// d^i/dmu_1^i omega_{n,j}, n = 0..N, on the given Gauss-Hermite rule. g2 receives E[g^2] when given.
std::vector<std::array<double, 4>> weights_for(const MixedProxyParams& p, int j, int N, const QuadratureRule& gh,
                                               double* g2 = nullptr) {
    auto [lnc, ds] = c_and_dsigma(p, j);
    double sgn = j == 1 ? -1.0 : 1.0;  // d lnC_j / d mu_1
    std::vector<std::array<double, 4>> w(N + 1, {0.0, 0.0, 0.0, 0.0});
    std::vector<double> he(N + 1);
    auto [q0, q1] = live_nodes(gh);
    double gg = 0.0;
    for (std::size_t q = q0; q < q1; ++q) {
        double y = gh.nodes[q];
        double lg = log_g(lnc, ds, y), W = gh.weights[q], e = std::exp(-lg);  // lg >= 0, so e <= 1
        double g = e > 0.0 ? W / e : std::exp(lg + std::log(W));
        double gi = W * e, gi3 = gi * e * e, gi5 = gi3 * e * e;
        if (g2) gg += g * (g / W);
        double d[4] = {g, sgn * 0.5 * (g - gi), 0.25 * (g - gi3), sgn * 0.125 * (g - gi + 3 * gi3 - 3 * gi5)};
        hermite_all(N, y, he.data());
        for (int n = 0; n <= N; ++n)
            for (int i = 0; i < 4; ++i) w[n][i] += d[i] * he[n];
    }
    double fact = 1.0;
    for (int n = 0; n <= N; ++n) {
        if (n > 0) fact *= n;
        for (int i = 0; i < 4; ++i) w[n][i] /= fact;
    }
    if (g2) *g2 = gg;
    return w;
}

// omega_{N,j} alone.
double top_weight(const MixedProxyParams& p, int j, int N, const QuadratureRule& gh) {
    auto [lnc, ds] = c_and_dsigma(p, j);
    std::vector<double> he(N + 1);
    auto [q0, q1] = live_nodes(gh);
    double s = 0.0;
    for (std::size_t q = q0; q < q1; ++q) {
        double y = gh.nodes[q];
        hermite_all(N, y, he.data());
        s += std::exp(log_g(lnc, ds, y) + std::log(gh.weights[q])) * he[N];
    }
    return s / std::tgamma(N + 1.0);
}

void check_converged(const MixedProxyParams& p, int j, int N, double coarse, int gh_nodes) {
    if (std::abs(top_weight(p, j, N, gauss_hermite_cached(2 * gh_nodes)) - coarse) > 1e-6)
        throw Error(Errc::order_too_high, "Hermite weight quadrature not converged at N = " + std::to_string(N) +
                                              "; use a smaller order");
}

CCoeffs layer_c(const MixedProxyParams& p) {
    if (p.sigma[0] > 0.0 && p.sigma[1] > 0.0) return c_coeffs(p);
    CCoeffs c{};
    for (int j = 0; j < 2; ++j) c[j] = {1.0 + p.gamma[j].delta_sum, 0.0, 0.0, 0.0};
    return c;
}

}  // namespace

HermiteLayer hermite_weights(const MixedProxyParams& p, double k, int N, int gh_nodes) {
    if (N < 0 || N > 25) throw Error(Errc::order_too_high, "Hermite order must lie in [0, 25]");
    HermiteLayer L;
    L.N = N;
    L.k = k;
    L.A = root_A(p, k);
    const auto& gh = gauss_hermite_cached(gh_nodes);
    const auto& gh2 = gauss_hermite_cached(2 * gh_nodes);
    for (int j = 1; j <= 2; ++j) {
        auto [lnc, ds] = c_and_dsigma(p, j);
        L.lnC[j - 1] = lnc;
        L.dsigma[j - 1] = ds;
        if (p.lambda[j - 1] <= 0.0) {
            L.dw[j - 1].assign(N + 1, {0.0, 0.0, 0.0, 0.0});
            continue;
        }
        L.dw[j - 1] = weights_for(p, j, N, gh);
        auto fine = weights_for(p, j, N, gh2);
        if (std::abs(fine[N][0] - L.dw[j - 1][N][0]) > 1e-6)
            throw Error(Errc::order_too_high, "Hermite weight quadrature not converged at N = " + std::to_string(N) +
                                                  "; use a smaller order");
    }
    L.c = layer_c(p);
    return L;
}

HermiteLayer component_layer(const MixedProxyParams& p, double k, int j, int N) {
    check_component(j);
    if (N < 0 || N > 25) throw Error(Errc::order_too_high, "Hermite order must lie in [0, 25]");
    if (p.lambda[j - 1] <= 0.0) throw Error(Errc::degenerate_component, "component has zero weight");
    const int gh_nodes = 400;
    const auto& gh = gauss_hermite_cached(gh_nodes);
    HermiteLayer L;
    L.k = k;
    L.A = root_A(p, k);
    for (int i = 1; i <= 2; ++i) std::tie(L.lnC[i - 1], L.dsigma[i - 1]) = c_and_dsigma(p, i);
    double g2 = 0.0;
    auto w = weights_for(p, j, N ? N : 25, gh, &g2);
    if (N == 0) {
        // mse_n = E[g^2] - sum_{m <= n} m! omega_m^2 by discrete orthogonality of the rule
        std::vector<double> mse(26);
        double acc = w[0][0] * w[0][0], fact = 1.0;
        for (int n = 1; n <= 25; ++n) {
            fact *= n;
            acc += fact * w[n][0] * w[n][0];
            mse[n] = g2 - acc;
        }
        double best = *std::min_element(mse.begin() + 1, mse.end());
        N = 25;
        for (int n = 1; n <= 25; ++n)
            if (mse[n] <= best + 1e-6) {
                N = n;
                break;
            }
        w.resize(N + 1);
    }
    check_converged(p, j, N, w[N][0], gh_nodes);
    L.N = N;
    L.dw[j - 1] = std::move(w);
    L.c = layer_c(p);
    return L;
}

int default_component(const MixedProxyParams& p) {
    if (p.lambda[1] <= 0.0) return 1;
    if (p.lambda[0] <= 0.0) return 2;
    return p.sigma[0] <= p.sigma[1] ? 1 : 2;
}

OrderChoice optimal_order(const MixedProxyParams& p, int j, int N_max) {
    check_component(j);
    if (N_max < 1) throw Error(Errc::domain, "N_max must be at least 1");
    N_max = std::min(N_max, 25);
    const auto& gh = gauss_hermite_cached(400);
    auto w = weights_for(p, j, N_max, gh);
    auto [lnc, ds] = c_and_dsigma(p, j);
    std::vector<double> mse(N_max + 1, 0.0), he(N_max + 1);
    auto [q0, q1] = live_nodes(gh);
    for (std::size_t q = q0; q < q1; ++q) {
        double y = gh.nodes[q];
        double g = std::exp(log_g(lnc, ds, y));
        hermite_all(N_max, y, he.data());
        double s = w[0][0];
        for (int n = 1; n <= N_max; ++n) {
            s += w[n][0] * he[n];
            mse[n] += gh.weights[q] * (s - g) * (s - g);
        }
    }
    double best = *std::min_element(mse.begin() + 1, mse.end());
    for (int n = 1; n <= N_max; ++n)
        if (mse[n] <= best + 1e-6) return {n, mse[n]};
    return {N_max, mse[N_max]};
}

namespace {

struct PriceJets {
    Jet call, put, future;
};

// Hermite N-th order main term as jets in (d mu_1, d mu_2).
PriceJets price_jets(const HermiteLayer& L, const MixedProxyParams& p, double k, int j, Boundary b) {
    int a = j - 1;
    Jet e1 = Jet::var1(0.0), e2 = Jet::var2(0.0);
    Jet dj = j == 1 ? e1 : e2;

    // boundary A(mu): Newton on ln h(A) = 2k in jet arithmetic
    Jet A = Jet::constant(L.A);
    if (b == Boundary::moving) {
        bool only1 = p.lambda[1] <= 0.0, only2 = p.lambda[0] <= 0.0;
        for (int it = 0; it < 4; ++it) {
            Jet z1 = e1 + (safe_log(p.lambda[0]) + p.mu[0]) + p.sigma[0] * A;
            Jet z2 = e2 + (safe_log(p.lambda[1]) + p.mu[1]) + p.sigma[1] * A;
            Jet lh, dlh;
            if (only1) {
                lh = z1;
                dlh = Jet::constant(p.sigma[0]);
            } else if (only2) {
                lh = z2;
                dlh = Jet::constant(p.sigma[1]);
            } else {
                Jet d = z2 - z1;
                double x = d.value(), s = softplus(x), pi = 1.0 / (1.0 + std::exp(-x));
                double s2 = pi * (1 - pi), s3 = s2 * (1 - 2 * pi), s4 = s3 * (1 - 2 * pi) - 2 * s2 * s2;
                lh = z1 + compose({s, pi, s2, s3}, d);
                Jet pij = compose({pi, s2, s3, s4}, d);
                dlh = Jet::constant(p.sigma[0]) + (p.sigma[1] - p.sigma[0]) * pij;
            }
            A = A - (lh - 2.0 * k) * reciprocal(dlh);
        }
    }
    Jet ay = A - p.sigma[a] / 2.0;
    double a0 = ay.value(), A0 = A.value();

    // omega_n depends on mu_1 - mu_2 only. With s = mu_1 - mu_2 and d = ay - a0,
    // sum_n omega_n(s) f_n(a0 + d) = sum_{i + m <= 3} C_{im} s^i d^m / (i! m!), C_{im} = sum_n omega_n^(i) f_n^(m).
    std::array<Jet, 4> S, D;
    S[0] = D[0] = Jet::constant(1.0);
    S[1] = e1 - e2;
    D[1] = ay - a0;
    for (int i = 2; i < 4; ++i) {
        S[i] = S[i - 1] * S[1];
        D[i] = D[i - 1] * D[1];
    }
    const auto& dw = L.dw[a];
    std::vector<double> he(L.N + 3);
    hermite_all(L.N + 2, a0, he.data());
    double ph = norm_pdf(a0);
    double C0[4][4] = {}, Ct[4][4] = {};  // n = 0 and n >= 1 parts
    for (int n = 0; n <= L.N; ++n) {
        std::array<double, 4> f;
        if (n == 0)
            f = {norm_cdf(-a0), -ph, he[1] * ph, -he[2] * ph};
        else
            f = {he[n - 1] * ph, -he[n] * ph, he[n + 1] * ph, -he[n + 2] * ph};
        auto& C = n == 0 ? C0 : Ct;
        for (int i = 0; i < 4; ++i)
            for (int m = 0; i + m < 4; ++m) C[i][m] += dw[n][i] * f[m];
    }
    static constexpr double fact[4] = {1, 1, 2, 6};
    Jet sum_upper, sum_tail;  // sum_n omega_n J_n(a), and the n >= 1 part
    for (int i = 0; i < 4; ++i)
        for (int m = 0; i + m < 4; ++m) {
            Jet sd = S[i] * D[m];
            double f = fact[i] * fact[m];
            sum_tail += (Ct[i][m] / f) * sd;
            sum_upper += ((C0[i][m] + Ct[i][m]) / f) * sd;
        }
    auto omega0 = [&] {
        const auto& w = dw[0];
        return Jet::constant(w[0]) + w[1] * S[1] + (w[2] / 2.0) * S[2] + (w[3] / 6.0) * S[3];
    };
    Jet w0 = omega0();
    Jet phi_a = compose({norm_cdf(a0), ph, -a0 * ph, (a0 * a0 - 1) * ph}, ay);
    double pA = norm_pdf(A0);
    Jet cdf_negA = compose({norm_cdf(-A0), -pA, A0 * pA, -(A0 * A0 - 1) * pA}, A);
    Jet cdf_A = compose({norm_cdf(A0), pA, -A0 * pA, (A0 * A0 - 1) * pA}, A);

    Jet pre = prefactor(p, j) * exp(0.5 * dj);
    double K = std::exp(k);
    PriceJets r;
    r.call = pre * sum_upper - K * cdf_negA;
    r.put = K * cdf_A - pre * (w0 * phi_a - sum_tail);
    r.future = pre * w0;
    return r;
}

// sum_{i,J} gamma_{i,J} P_{i,J} V from the jet of V.
double apply_corrections(const Jet& V, const MixedProxyParams& p) {
    double out = 0.0;
    for (int J = 0; J < 2; ++J) {
        double r = p.sigma[1 - J] / p.sigma[J];
        if (!std::isfinite(r)) throw Error(Errc::degenerate_component, "sigma_P vanishes");
        auto d = [&](int nj, int no) { return J == 0 ? V.deriv(nj, no) : V.deriv(no, nj); };
        double P1 = d(1, 0);
        double P2 = d(2, 0) + r * d(1, 1);
        double P3 = d(3, 0) + 2 * r * d(2, 1) + r * r * d(1, 2);
        out += p.gamma[J][0] * P1 + p.gamma[J][1] * P2 + p.gamma[J][2] * P3;
    }
    return out;
}

}  // namespace

HermitePrices hermite_prices(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j, Boundary b) {
    check_component(j);
    if (p.lambda[j - 1] <= 0.0) throw Error(Errc::degenerate_component, "component has zero weight");
    if (p.sigma[j - 1] <= 0.0) throw Error(Errc::degenerate_component, "component sigma_P vanishes");
    auto pj = price_jets(L, p, c.k, j, b);
    HermitePrices r{};
    r.call_lead = pj.call.value();
    r.put_lead = pj.put.value();
    r.future_lead = pj.future.value();
    if (p.sigma[0] > 0.0 && p.sigma[1] > 0.0) {
        r.call = r.call_lead + apply_corrections(pj.call, p);
        r.put = r.put_lead + apply_corrections(pj.put, p);
        r.future = r.future_lead + apply_corrections(pj.future, p);
    } else {
        // the zero-sigma component carries no weight in the operators
        MixedProxyParams q = p;
        q.gamma[2 - j] = GammaCoefficients::make(0, 0, 0);
        q.sigma[2 - j] = p.sigma[j - 1];
        r.call = r.call_lead + apply_corrections(pj.call, q);
        r.put = r.put_lead + apply_corrections(pj.put, q);
        r.future = r.future_lead + apply_corrections(pj.future, q);
    }
    return r;
}

ThetaChoice theta_and_coords(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j, double F_P,
                             std::optional<double> theta) {
    check_component(j);
    if (!(F_P > 0.0)) throw Error(Errc::domain, "futures price must be positive");
    double sj = p.sigma[j - 1];
    double lnF = std::log(F_P);
    double delta = c.k - lnF - L.A * sj / 2.0 + sj * sj / 8.0;
    double th = theta ? *theta : (delta > 0.0 ? 1.0 : 0.0);
    if (!(th >= 0.0 && th <= 1.0)) throw Error(Errc::domain, "theta must lie in [0, 1]");
    return {th, j, lnF + th * delta, c.k - (1.0 - th) * delta, delta};
}

namespace {

// C - F Phi(-a) + e^k Phi(-A): the Hermite correction sum times phi(a) in the closed form.
double hermite_excess(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j,
                      const HermitePrices& hp) {
    double a = L.A - p.sigma[j - 1] / 2.0;
    return hp.call - hp.future * norm_cdf(-a) + std::exp(c.k) * norm_cdf(-L.A);
}

}  // namespace

double iv_expansion_mixed(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j,
                          const ThetaChoice& th, const HermitePrices& hp) {
    double st = p.sigma_tilde(j);
    if (!(st > 0.0)) throw Error(Errc::degenerate_vol, "sigma_tilde must be positive");
    double a = L.A - p.sigma[j - 1] / 2.0;
    return st / 2.0 + hermite_excess(L, p, c, j, hp) / (std::exp(th.x_theta) * std::sqrt(c.T) * norm_pdf(a));
}

double iv_expansion_mixed(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j,
                          const ThetaChoice& th, Boundary b) {
    return iv_expansion_mixed(L, p, c, j, th, hermite_prices(L, p, c, j, b));
}

double iv_expansion_extended(const HermiteLayer& L, const MixedProxyParams& p, const VixContract& c, int j, Boundary b) {
    double st = p.sigma_tilde(j);
    if (!(st > 0.0)) throw Error(Errc::degenerate_vol, "sigma_tilde must be positive");
    auto hp = hermite_prices(L, p, c, j, b);
    double ex = hermite_excess(L, p, c, j, hp);
    double v = vega({std::log(hp.future), c.k, st / 2.0, c.T});
    if (!(v > 1e-12)) throw Error(Errc::degenerate_vol, "vega vanishes at this strike");
    return st / 2.0 + ex / v;
}

MixedPoint mixed_expansion(const MixedProxyParams& p, const VixContract& c, int j, int N, Boundary b) {
    if (j == 0) j = default_component(p);
    if (N == 0) N = optimal_order(p, j).N;
    auto L = hermite_weights(p, c.k, N);
    auto hp = hermite_prices(L, p, c, j, b);
    auto th = theta_and_coords(L, p, c, j, hp.future);
    return {iv_expansion_mixed(L, p, c, j, th, hp), hp.call, hp.put, hp.future, j, N};
}

MomentMatch moment_matched_iv(const MixedModel& m, const VixContract& c, const QuadSpec& q) {
    m.validate();
    auto um = unit_moments(m.k1.kind, m.k1.decay, m.curve, c, q);
    auto p = MixedProxyParams::from_moments(um, m.k1.vol, m.k2.vol, m.lambda, c.T);
    MomentMatch r{};
    const auto &l = p.lambda, &mu = p.mu, &s = p.sigma;
    r.m1 = l[0] * std::exp(mu[0] + s[0] * s[0] / 2) + l[1] * std::exp(mu[1] + s[1] * s[1] / 2);
    r.m2 = l[0] * l[0] * std::exp(2 * mu[0] + 2 * s[0] * s[0]) + l[1] * l[1] * std::exp(2 * mu[1] + 2 * s[1] * s[1]) +
           2 * l[0] * l[1] * std::exp(mu[0] + mu[1] + (s[0] + s[1]) * (s[0] + s[1]) / 2);
    if (!(r.m2 > r.m1 * r.m1)) throw Error(Errc::matching_infeasible, "second moment does not exceed squared mean");
    r.sigma_y = std::sqrt(std::log(r.m2 / (r.m1 * r.m1)));
    r.mu_y = std::log(r.m1) - r.sigma_y * r.sigma_y / 2;
    double R = 2 * (p.L - r.mu_y) / (r.sigma_y * r.sigma_y);
    bool expo = m.k1.kind == KernelKind::exponential;
    auto f = [&](double d) {
        auto u = unit_moments(m.k1.kind, d, m.curve, c, q);
        return u.m0 / u.s0sq - R;
    };
    double lo = expo ? 1e-4 : 1e-3, hi = expo ? 50.0 : 0.499;
    double d;
    try {
        d = find_root(f, lo, hi, 1e-15);
    } catch (const BracketError&) {
        throw Error(Errc::matching_infeasible, "moment-matching ratio equation has no root in the decay range");
    }
    auto u = unit_moments(m.k1.kind, d, m.curve, c, q);
    double v = r.sigma_y / std::sqrt(u.s0sq);
    r.kernel = KernelSpec{m.k1.kind, v, d};
    r.proxy = proxy_from_moments(u, v, c.T);
    r.gamma = gammas_from_moments(u, v);
    r.iv = iv_expansion(r.proxy, r.gamma, c);
    return r;
}

}  // namespace vixexp
