#pragma once

// Black-Scholes on the undiscounted forward, parametrised by log-spot x and log-strike k.

namespace vixexp {

struct BsInputs {
    double x;      // log forward
    double k;      // log strike
    double sigma;  // volatility per sqrt(year)
    double T;      // years
};

enum class OptionKind { call, put };

struct D1D2 {
    double d1, d2;
};

D1D2 d1_d2(const BsInputs& in);

double call_price(const BsInputs& in);
double put_price(const BsInputs& in);
double bs_price(const BsInputs& in, OptionKind kind);

double vega(const BsInputs& in);
double vomma(const BsInputs& in);

// i-th partial derivative in x, i in 1..3.
double dx_call(int i, const BsInputs& in);
double dx_put(int i, const BsInputs& in);

double implied_vol(double price, double x, double k, double T, OptionKind kind = OptionKind::call);

}  // namespace vixexp
