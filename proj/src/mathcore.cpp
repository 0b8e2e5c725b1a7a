#include "vixexp/mathcore.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

#include "vixexp/error.hpp"

namespace vixexp {

double hermite_poly(int n, double x) {
    if (n < 0 || n > 64) throw Error(Errc::unsupported_order, "hermite order " + std::to_string(n) + " outside [0, 64]");
    if (n == 0) return 1.0;
    double hm = 1.0, h = x;
    for (int k = 1; k < n; ++k) {
        double hp = x * h - k * hm;
        hm = h;
        h = hp;
    }
    return h;
}

void hermite_all(int n, double x, double* out) {
    if (n < 0 || n > 64) throw Error(Errc::unsupported_order, "hermite order " + std::to_string(n) + " outside [0, 64]");
    out[0] = 1.0;
    if (n >= 1) out[1] = x;
    for (int k = 1; k < n; ++k) out[k + 1] = x * out[k] - k * out[k - 1];
}

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

PdfCdf norm_pdf_cdf(double x) { return {norm_pdf(x), norm_cdf(x)}; }

double norm_inv_cdf(double p) {
    if (!(p > 0.0 && p < 1.0)) throw Error(Errc::domain, "inverse normal cdf needs p in (0,1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

QuadratureRule gauss_legendre(int n, double a, double b) {
    if (n < 2) throw Error(Errc::domain, "gauss-legendre needs n >= 2");
    if (!(a < b)) throw Error(Errc::domain, "gauss-legendre needs a < b");
    const auto& u = gauss_legendre_unit(n);
    QuadratureRule r;
    r.kind = QuadKind::gauss_legendre;
    r.a = a;
    r.b = b;
    r.nodes.resize(n);
    r.weights.resize(n);
    const double len = b - a;
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = a + len * u.nodes[i];
        r.weights[i] = len * u.weights[i];
    }
    return r;
}

static QuadratureRule build_legendre_unit(int n) {
    std::vector<double> x(n), w(n);
    const int m = (n + 1) / 2;
    for (int i = 0; i < m; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1.0, p2 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1);
            }
            pp = n * (z * p1 - p2) / (z * z - 1.0);
            double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
    }
    QuadratureRule r;
    r.kind = QuadKind::gauss_legendre;
    r.a = 0.0;
    r.b = 1.0;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        r.nodes[i] = 0.5 * (x[i] + 1.0);
        r.weights[i] = 0.5 * w[i];
    }
    return r;
}

// Newton on orthonormal Hermite polynomials; nodes whose weight underflows are dropped.
QuadratureRule gauss_hermite_prob(int n) {
    if (n < 2) throw Error(Errc::domain, "gauss-hermite needs n >= 2");
    // Golub-Welsch start, then Newton on the orthonormal recurrence scaled by e^{-x^2/4}.
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(n), sub(n - 1);
    for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(double(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();

    auto scaled = [n](double x, double& qn, double& qn1, double& sumsq) {
        double qm = 0.0, q = std::exp(-0.25 * x * x);
        sumsq = 0.0;
        for (int k = 0; k < n; ++k) {
            sumsq += q * q;
            double qp = (x * q - std::sqrt(double(k)) * qm) / std::sqrt(k + 1.0);
            qm = q;
            q = qp;
        }
        qn = q;
        qn1 = qm;
    };

    QuadratureRule r;
    r.kind = QuadKind::gauss_hermite_prob;
    for (int i = 0; i < n; ++i) {
        double x = ev[i];
        if (n % 2 == 1 && i == n / 2) x = 0.0;
        double qn, qn1, ss;
        for (int it = 0; it < 3; ++it) {
            scaled(x, qn, qn1, ss);
            if (qn1 == 0.0) break;
            x -= qn / (std::sqrt(double(n)) * qn1);
        }
        scaled(x, qn, qn1, ss);
        // w = 1 / sum_k p_k(x)^2 with p_k = q_k e^{x^2/4} orthonormal under N(0,1)
        double w = std::exp(-0.5 * x * x) / ss;
        if (!(w > 0.0) || !std::isfinite(w)) continue;
        r.nodes.push_back(x);
        r.weights.push_back(w);
    }
    return r;
}

namespace {
template <class Build>
const QuadratureRule& cached(std::map<int, std::unique_ptr<QuadratureRule>>& cache, std::mutex& mu, int n,
                             Build build) {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<QuadratureRule>(build(n))).first;
    return *it->second;
}
}  // namespace

const QuadratureRule& gauss_legendre_unit(int n) {
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mu;
    if (n < 2) throw Error(Errc::domain, "gauss-legendre needs n >= 2");
    return cached(cache, mu, n, build_legendre_unit);
}

const QuadratureRule& gauss_hermite_cached(int n) {
    static std::map<int, std::unique_ptr<QuadratureRule>> cache;
    static std::mutex mu;
    return cached(cache, mu, n, gauss_hermite_prob);
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol, int max_iter) {
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (std::isnan(flo) || std::isnan(fhi) || (flo > 0) == (fhi > 0)) throw BracketError(lo, hi, flo, fhi);
    std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
    auto done = [tol](double a, double b) { return std::abs(b - a) <= tol * std::max(1.0, std::abs(a)); };
    auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, done, iters);
    if (iters >= static_cast<std::uintmax_t>(max_iter) && !done(r.first, r.second))
        throw Error(Errc::no_convergence, "root finder exceeded " + std::to_string(max_iter) + " iterations");
    return 0.5 * (r.first + r.second);
}

std::pair<double, double> expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                                         int max_tries) {
    double flo = f(lo), fhi = f(hi);
    for (int i = 0; i < max_tries; ++i) {
        if ((flo <= 0) != (fhi <= 0)) return {lo, hi};
        double mid = 0.5 * (lo + hi), half = hi - lo;
        lo = mid - half;
        hi = mid + half;
        flo = f(lo);
        fhi = f(hi);
    }
    throw BracketError(lo, hi, flo, fhi);
}

double log_sum_exp(double a, double b) {
    double m = std::max(a, b);
    if (m == -INFINITY) return m;
    return m + std::log1p(std::exp(-std::abs(a - b)));
}

double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

}  // namespace vixexp
