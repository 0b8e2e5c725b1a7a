#pragma once

#include <array>
#include <cmath>

namespace vixexp {

// Truncated Taylor polynomial in two variables (e1, e2) through total degree 3.
struct Jet {
    // coefficient order: 1, e1, e2, e1^2, e1 e2, e2^2, e1^3, e1^2 e2, e1 e2^2, e2^3
    std::array<double, 10> c{};

    static constexpr int idx(int p, int q) {
        int d = p + q;
        return d * (d + 1) / 2 + q;
    }
    static constexpr int pow_p(int i) {
        constexpr int P[10] = {0, 1, 0, 2, 1, 0, 3, 2, 1, 0};
        return P[i];
    }
    static constexpr int pow_q(int i) {
        constexpr int Q[10] = {0, 0, 1, 0, 1, 2, 0, 1, 2, 3};
        return Q[i];
    }

    static Jet constant(double v) {
        Jet j;
        j.c[0] = v;
        return j;
    }
    static Jet var1(double v) {
        Jet j = constant(v);
        j.c[1] = 1.0;
        return j;
    }
    static Jet var2(double v) {
        Jet j = constant(v);
        j.c[2] = 1.0;
        return j;
    }

    double value() const { return c[0]; }
    // d^{p+q} / de1^p de2^q at the origin
    double deriv(int p, int q) const {
        static constexpr double f[4] = {1, 1, 2, 6};
        return c[idx(p, q)] * f[p] * f[q];
    }

    Jet& operator+=(const Jet& o) {
        for (int i = 0; i < 10; ++i) c[i] += o.c[i];
        return *this;
    }
    Jet& operator-=(const Jet& o) {
        for (int i = 0; i < 10; ++i) c[i] -= o.c[i];
        return *this;
    }
    Jet& operator*=(double s) {
        for (auto& x : c) x *= s;
        return *this;
    }
};

inline Jet operator+(Jet a, const Jet& b) { return a += b; }
inline Jet operator-(Jet a, const Jet& b) { return a -= b; }
inline Jet operator-(Jet a) { return a *= -1.0; }
inline Jet operator*(Jet a, double s) { return a *= s; }
inline Jet operator*(double s, Jet a) { return a *= s; }
inline Jet operator+(Jet a, double s) {
    a.c[0] += s;
    return a;
}
inline Jet operator-(Jet a, double s) {
    a.c[0] -= s;
    return a;
}

namespace detail {
struct JetProductTable {
    int n = 0;
    std::array<std::array<int, 3>, 35> t{};  // (i, k, idx of e^i e^k) with total degree <= 3
    constexpr JetProductTable() {
        for (int i = 0; i < 10; ++i)
            for (int k = 0; k < 10; ++k) {
                int p = Jet::pow_p(i) + Jet::pow_p(k), q = Jet::pow_q(i) + Jet::pow_q(k);
                if (p + q <= 3) t[n++] = {i, k, Jet::idx(p, q)};
            }
    }
};
inline constexpr JetProductTable kJetProduct{};
}  // namespace detail

inline Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
#pragma GCC unroll 35
    for (const auto& [i, k, o] : detail::kJetProduct.t) r.c[o] += a.c[i] * b.c[k];
    return r;
}

// f(x) given f and its first three derivatives at x.value().
inline Jet compose(const std::array<double, 4>& f, const Jet& x) {
    // d = x - x.value() has no constant term, so d^2 starts at degree 2 and d^3 is the cube of the linear part
    const auto& c = x.c;
    double a1 = c[1], a2 = c[2];
    double h2 = f[2] / 2.0, h3 = f[3] / 6.0;
    Jet r;
    r.c[0] = f[0];
    for (int i = 1; i < 10; ++i) r.c[i] = f[1] * c[i];
    r.c[3] += h2 * a1 * a1;
    r.c[4] += h2 * 2.0 * a1 * a2;
    r.c[5] += h2 * a2 * a2;
    r.c[6] += h2 * 2.0 * a1 * c[3] + h3 * a1 * a1 * a1;
    r.c[7] += h2 * 2.0 * (a1 * c[4] + a2 * c[3]) + h3 * 3.0 * a1 * a1 * a2;
    r.c[8] += h2 * 2.0 * (a1 * c[5] + a2 * c[4]) + h3 * 3.0 * a1 * a2 * a2;
    r.c[9] += h2 * 2.0 * a2 * c[5] + h3 * a2 * a2 * a2;
    return r;
}

inline Jet exp(const Jet& x) {
    double e = std::exp(x.value());
    return compose({e, e, e, e}, x);
}

inline Jet reciprocal(const Jet& x) {
    double v = 1.0 / x.value();
    return compose({v, -v * v, 2 * v * v * v, -6 * v * v * v * v}, x);
}

}  // namespace vixexp
