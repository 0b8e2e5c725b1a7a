#pragma once

#include <functional>
#include <vector>

namespace vixexp {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

enum class QuadKind { gauss_legendre, gauss_hermite_prob };

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;
    QuadKind kind = QuadKind::gauss_legendre;
    double a = -1.0, b = 1.0;  // interval for Gauss-Legendre

    std::size_t size() const { return nodes.size(); }

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

// Probabilist's Hermite polynomial He_n(x) by three-term recurrence; n <= 64.
double hermite_poly(int n, double x);
// He_0(x) .. He_n(x) into out (size n+1).
void hermite_all(int n, double x, double* out);

double norm_pdf(double x);
double norm_cdf(double x);

struct PdfCdf {
    double density;
    double cumulative;
};
PdfCdf norm_pdf_cdf(double x);

double norm_inv_cdf(double p);

QuadratureRule gauss_legendre(int n, double a, double b);
// Rule with sum w_i f(x_i) ~ E[f(Z)], Z ~ N(0,1).
QuadratureRule gauss_hermite_prob(int n);

// Cached versions; returned references stay valid for the process lifetime.
const QuadratureRule& gauss_legendre_unit(int n);  // on [0, 1]
const QuadratureRule& gauss_hermite_cached(int n);

// Brent bracketing root finder. Throws BracketError without a sign change.
double find_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-12,
                 int max_iter = 200);

// Expands [lo, hi] geometrically around its midpoint until a sign change is found.
std::pair<double, double> expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                                         int max_tries = 60);

double log_sum_exp(double a, double b);
// log(1 + e^x) without overflow.
double softplus(double x);

}  // namespace vixexp
