#include "vixexp/moments.hpp"

#include <cmath>
#include <vector>

#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"

namespace vixexp {

namespace {

struct Nodes {
    std::vector<double> off, w;  // T - t for t-rules, u - T for u-rules
};

// t-rule on [0, T]; power-law kernels use s = (T-t)^{2H}.
Nodes t_rule(KernelKind kind, double H, double T, int n) {
    Nodes r;
    const auto& g = gauss_legendre_unit(n);
    if (kind == KernelKind::exponential) {
        for (int i = 0; i < n; ++i) {
            r.off.push_back(T * (1.0 - g.nodes[i]));
            r.w.push_back(T * g.weights[i]);
        }
        return r;
    }
    double p = 1.0 / (2.0 * H), smax = std::pow(T, 2.0 * H);
    for (int i = 0; i < n; ++i) {
        double s = smax * g.nodes[i];
        r.off.push_back(std::pow(s, p));
        r.w.push_back(smax * g.weights[i] * p * std::pow(s, p - 1.0));
    }
    return r;
}

// u-rule over the window with xi-weights folded in, so that sum w f(x) = <f>.
// The piece starting at T uses w = ((u-T)/len)^{2H} for power-law kernels.
Nodes u_rule(KernelKind kind, double H, const std::vector<ForwardVarianceCurve::Piece>& pieces, double T,
             double norm, int n) {
    Nodes r;
    const auto& g = gauss_legendre_unit(n);
    for (auto& pc : pieces) {
        double len = pc.b - pc.a, rho = pc.xi / norm;
        bool sub = kind == KernelKind::power_law && pc.a == T;
        double p = 1.0 / (2.0 * H);
        for (int i = 0; i < n; ++i) {
            if (sub) {
                double w = g.nodes[i];
                r.off.push_back(pc.a - T + len * std::pow(w, p));
                r.w.push_back(rho * len * g.weights[i] * p * std::pow(w, p - 1.0));
            } else {
                r.off.push_back(pc.a - T + len * g.nodes[i]);
                r.w.push_back(rho * len * g.weights[i]);
            }
        }
    }
    return r;
}

}  // namespace

UnitMoments unit_moments(KernelKind kind, double decay, const ForwardVarianceCurve& curve, const VixContract& c,
                         const QuadSpec& q, Exec exec) {
    KernelSpec{kind, 1.0, decay}.validate();
    double ev = mean_vix2(curve, c);
    double T = c.T;
    auto pieces = curve.pieces(T, T + c.delta);
    double norm = ev * c.delta;
    bool expo = kind == KernelKind::exponential;
    double kap = decay, H = decay, hp = H + 0.5;

    Nodes tr = t_rule(kind, H, T, q.n_t);
    Nodes ur = u_rule(kind, H, pieces, T, norm, q.n_u);
    const int nt = static_cast<int>(tr.off.size()), nu = static_cast<int>(ur.off.size());

    // kbar(t) from closed-form piece integrals of the kernel in u
    std::vector<double> kbar(nt);
    for (int i = 0; i < nt; ++i) {
        double tau = tr.off[i], s = 0.0;
        for (auto& pc : pieces) {
            double rho = pc.xi / norm, da = pc.a - T + tau, db = pc.b - T + tau;
            if (expo)
                s += rho * std::exp(-kap * da) * (-std::expm1(-kap * (pc.b - pc.a))) / kap;
            else
                s += rho * (std::pow(db, hp) - std::pow(da, hp)) / hp;
        }
        kbar[i] = s;
    }

    UnitMoments m;
    m.L = std::log(ev);
    for (int i = 0; i < nt; ++i) m.s0sq += tr.w[i] * kbar[i] * kbar[i];

    std::vector<double> I2(nu), M(nu);
    double bexp = 0.0;
    if (expo)
        for (int i = 0; i < nt; ++i) bexp += tr.w[i] * kbar[i] * std::exp(-kap * tr.off[i]);
    for_each_index(nu, exec, [&](int a) {
        double eps = ur.off[a];
        if (expo) {
            I2[a] = std::exp(-2.0 * kap * eps) * (-std::expm1(-2.0 * kap * T)) / (2.0 * kap);
            M[a] = std::exp(-kap * eps) * bexp;
        } else {
            I2[a] = (std::pow(T + eps, 2.0 * H) - std::pow(eps, 2.0 * H)) / (2.0 * H);
            double s = 0.0;
            for (int i = 0; i < nt; ++i) s += tr.w[i] * kbar[i] * std::pow(eps + tr.off[i], H - 0.5);
            M[a] = s;
        }
    });

    double mbar = 0.0;
    for (int a = 0; a < nu; ++a) {
        m.m0 += ur.w[a] * I2[a];
        mbar += ur.w[a] * M[a];
    }
    for (int a = 0; a < nu; ++a) {
        double x = I2[a] - m.m0, y = M[a] - mbar;
        m.a2 += ur.w[a] * x * x;
        m.ac += ur.w[a] * x * y;
        m.c2 += ur.w[a] * y * y;
    }
    return m;
}

}  // namespace vixexp
