#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>

#include "vixexp/error.hpp"
#include "vixexp/jet.hpp"
#include "vixexp/mathcore.hpp"

using namespace vixexp;

TEST_CASE("hermite polynomials") {
    CHECK(hermite_poly(0, 3.7) == 1.0);
    CHECK(hermite_poly(2, 2.0) == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(hermite_poly(3, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK_THROWS_AS(hermite_poly(65, 1.0), Error);

    double buf[8];
    hermite_all(7, 0.3, buf);
    for (int n = 0; n <= 7; ++n) CHECK(buf[n] == doctest::Approx(hermite_poly(n, 0.3)).epsilon(1e-15));
}

TEST_CASE("normal density and distribution") {
    auto r = norm_pdf_cdf(0.0);
    CHECK(r.density == doctest::Approx(0.3989422804014327).epsilon(1e-15));
    CHECK(r.cumulative == 0.5);
    CHECK(std::abs(norm_cdf(8.0) - 1.0) < 1e-15);
    // 30-digit reference value of Phi(1)
    CHECK(std::abs(norm_cdf(1.0) - 0.841344746068542948585232545632) < 1e-15);
    CHECK(std::abs(norm_cdf(-1.0) - (1.0 - 0.841344746068542948585232545632)) < 1e-15);
    for (double p : {1e-7, 0.01, 0.3, 0.5, 0.9, 1 - 1e-7}) CHECK(norm_cdf(norm_inv_cdf(p)) == doctest::Approx(p).epsilon(1e-12));
}

TEST_CASE("gauss-legendre rules") {
    auto r2 = gauss_legendre(2, -1, 1);
    CHECK(std::abs(r2.nodes[0] + 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(std::abs(r2.nodes[1] - 1 / std::sqrt(3.0)) < 1e-15);
    CHECK(r2.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

    auto r = gauss_legendre(120, 0, 1);
    CHECK(std::abs(r.integrate([](double x) { return std::pow(x, 5); }) - 1.0 / 6.0) < 1e-14);
    double sw = 0;
    for (double w : gauss_legendre(120, 0, 0.25).weights) sw += w;
    CHECK(std::abs(sw - 0.25) < 1e-12);

    // exact for degree <= 2n-1
    auto r7 = gauss_legendre(7, -0.5, 2.0);
    for (int d = 0; d <= 13; ++d) {
        double exact = (std::pow(2.0, d + 1) - std::pow(-0.5, d + 1)) / (d + 1);
        CHECK(r7.integrate([d](double x) { return std::pow(x, d); }) == doctest::Approx(exact).epsilon(1e-12));
    }
    for (double w : r.weights) CHECK(w > 0);
    CHECK_THROWS_AS(gauss_legendre(10, 1.0, 1.0), Error);
}

TEST_CASE("gauss-hermite probabilist rule") {
    auto g = gauss_hermite_prob(10);
    CHECK(std::abs(g.integrate([](double) { return 1.0; }) - 1.0) < 1e-14);
    CHECK(std::abs(g.integrate([](double x) { return x * x; }) - 1.0) < 1e-12);
    auto g40 = gauss_hermite_prob(40);
    CHECK(std::abs(g40.integrate([](double x) { return std::exp(x); }) - std::exp(0.5)) < 1e-10);
    for (double w : g40.weights) CHECK(w > 0);
}

TEST_CASE("hermite orthogonality under the gaussian rule") {
    for (int nodes : {40, 400}) {
        const auto& g = gauss_hermite_cached(nodes);
        double fact[13] = {1};
        for (int i = 1; i <= 12; ++i) fact[i] = fact[i - 1] * i;
        for (int m = 0; m <= 12; ++m)
            for (int n = 0; n <= 12; ++n) {
                double v = g.integrate([&](double x) { return hermite_poly(m, x) * hermite_poly(n, x); });
                double want = m == n ? 1.0 : 0.0;
                CHECK(std::abs(v / std::sqrt(fact[m] * fact[n]) - want) < 1e-12);
            }
    }
}

TEST_CASE("quadrature self-convergence") {
    auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
    double a = gauss_legendre(60, 0, 2).integrate(f);
    double b = gauss_legendre(120, 0, 2).integrate(f);
    CHECK(std::abs(a - b) < 1e-10);
}

TEST_CASE("root finding") {
    CHECK(find_root([](double x) { return x - 1; }, 0, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(find_root([](double x) { return norm_cdf(x) - 0.5; }, -1, 1)) < 1e-12);
    CHECK(std::abs(find_root([](double x) { return x * x * x - 2; }, 1, 2) - 1.25992104989487316) < 1e-12);

    try {
        find_root([](double x) { return x * x + 1; }, -1, 2);
        FAIL("expected bracket error");
    } catch (const BracketError& e) {
        CHECK(e.f_lo == 2.0);
        CHECK(e.f_hi == 5.0);
        CHECK(e.code() == Errc::bracket);
    }

    auto f = [](double x) { return std::tanh(x - 0.37) + 0.01 * x; };
    double r1 = find_root(f, -3, 5);
    double r2 = find_root(f, -3, 5);
    CHECK(std::memcmp(&r1, &r2, sizeof r1) == 0);

    auto [lo, hi] = expand_bracket([](double x) { return x - 50.0; }, 0, 1);
    CHECK(lo <= 50.0);
    CHECK(hi >= 50.0);
}

TEST_CASE("log-space helpers") {
    CHECK(log_sum_exp(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)));
    CHECK(softplus(800.0) == doctest::Approx(800.0));
    CHECK(softplus(-800.0) >= 0.0);
    CHECK(softplus(0.0) == doctest::Approx(std::log(2.0)));
}

namespace {

Jet random_jet(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    Jet j;
    for (auto& x : j.c) x = u(rng);
    return j;
}

// Full product of the two cubic polynomials, truncated afterwards.
Jet brute_product(const Jet& a, const Jet& b) {
    double full[7][7] = {};
    for (int i = 0; i < 10; ++i)
        for (int k = 0; k < 10; ++k)
            full[Jet::pow_p(i) + Jet::pow_p(k)][Jet::pow_q(i) + Jet::pow_q(k)] += a.c[i] * b.c[k];
    Jet r;
    for (int p = 0; p <= 3; ++p)
        for (int q = 0; p + q <= 3; ++q) r.c[Jet::idx(p, q)] = full[p][q];
    return r;
}

}  // namespace

TEST_CASE("jet product against brute-force polynomial multiplication") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 50; ++t) {
        auto a = random_jet(rng), b = random_jet(rng);
        auto r = a * b, e = brute_product(a, b);
        for (int i = 0; i < 10; ++i) CHECK(r.c[i] == doctest::Approx(e.c[i]).epsilon(1e-14));
    }
}

TEST_CASE("jet composition against the power series in the jet product") {
    std::mt19937_64 rng(12);
    for (int t = 0; t < 50; ++t) {
        auto x = random_jet(rng);
        std::array<double, 4> f{0.3, -1.2, 0.7, 2.5};
        Jet d = x;
        d.c[0] = 0.0;
        Jet naive = Jet::constant(f[0]) + f[1] * d + (f[2] / 2.0) * (d * d) + (f[3] / 6.0) * (d * d * d);
        auto r = compose(f, x);
        for (int i = 0; i < 10; ++i) CHECK(r.c[i] == doctest::Approx(naive.c[i]).epsilon(1e-14));
    }
    // exp(0.5 + e1 + e2): coefficients x^p y^q e^0.5 / (p! q!)
    auto e = exp(Jet::var1(0.5) + Jet::var2(0.0));
    const double fact[4] = {1, 1, 2, 6};
    for (int i = 0; i < 10; ++i)
        CHECK(e.c[i] == doctest::Approx(std::exp(0.5) / (fact[Jet::pow_p(i)] * fact[Jet::pow_q(i)])).epsilon(1e-15));
    // 1 / (2 + e1): (-1)^p / 2^{p+1}, no e2 terms
    auto r = reciprocal(Jet::var1(2.0));
    for (int i = 0; i < 10; ++i) {
        double want = Jet::pow_q(i) == 0 ? std::pow(-1.0, Jet::pow_p(i)) / std::pow(2.0, Jet::pow_p(i) + 1) : 0.0;
        CHECK(r.c[i] == doctest::Approx(want).epsilon(1e-15));
    }
    auto one = Jet::var2(1.3) * reciprocal(Jet::var2(1.3));
    CHECK(one.value() == doctest::Approx(1.0));
    for (int i = 1; i < 10; ++i) CHECK(std::abs(one.c[i]) < 1e-15);
}
