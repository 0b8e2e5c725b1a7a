#pragma once

#include <string>
#include <vector>

#include "vixexp/mixed.hpp"
#include "vixexp/model.hpp"
#include "vixexp/moments.hpp"

namespace vixexp {

enum class Family { bergomi, rbergomi, mixed_bergomi, mixed_rbergomi };

Family parse_family(const std::string& name);  // family error on unknown names
const char* family_name(Family f);
bool is_mixed(Family f);
KernelKind kernel_kind(Family f);
// Free parameters per slice: (vol) or (vol1, vol2, lambda).
int n_params(Family f);

struct Quote {
    double strike;  // VIX in decimals
    double iv;
};

struct Slice {
    double T;
    double future;
    std::vector<Quote> quotes;  // sorted by strike
};

struct MarketChain {
    std::vector<Slice> slices;  // sorted by T
    std::vector<std::string> warnings;
    std::size_t rows = 0;  // data rows read, before deduplication
};

// CSV with header maturity_years,future,strike,iv. Futures and strikes above 2 are read as index points.
MarketChain parse_chain(const std::string& text);
MarketChain load_chain(const std::string& path);

struct Bounds {
    double vol_lo = 1e-3, vol_hi = 20.0;
    double lambda_lo = 0.01, lambda_hi = 0.99;
    double xi_lo = 1e-5, xi_hi = 1.0;
};

// Expansion evaluator for one maturity on a flat curve with fixed decay; unit moments are computed once.
class SliceModel {
public:
    SliceModel(Family f, double decay, double T, const QuadSpec& q = {});

    double future(const std::vector<double>& params, double xi0, int N = 0) const;
    double iv(const std::vector<double>& params, double xi0, double k, int N = 0) const;
    // Strike batch; the Hermite weights do not depend on k and are built once.
    std::vector<double> ivs(const std::vector<double>& params, double xi0, const std::vector<double>& ks,
                            int N = 0) const;
    // Hermite order used for these parameters (0 for single-kernel families).
    int order(const std::vector<double>& params) const;
    AnyModel model(const std::vector<double>& params, double xi0) const;

    Family family() const { return f_; }
    double T() const { return T_; }
    double decay() const { return decay_; }

private:
    MixedProxyParams mixed(const std::vector<double>& params, double xi0) const;
    Family f_;
    double decay_, T_;
    UnitMoments um_;  // at xi0 = 1
};

// Root of F_model(xi0) = future on [xi_lo, xi_hi]; futures_unattainable without a bracket.
double fit_xi0(const SliceModel& sm, const std::vector<double>& params, double future, const Bounds& b = {},
               int N = 0);

struct LmOptions {
    int max_iter = 200;
    double step_tol = 1e-8;
    double fd_step = 1e-6;
};

struct LmStep {
    double before, after;  // objective at the accepted step, same Hermite order
    int N;
};

struct SliceFit {
    double T = 0.0;
    double future = 0.0;
    double xi0 = 0.0;
    std::vector<double> params;
    double rmse = 0.0;
    int iterations = 0;
    int N = 0;
    bool converged = false;
    bool window_overlap = false;  // [T, T + delta] reaches the next slice's maturity
    std::string error;            // non-empty when the slice failed
    std::vector<double> strikes, iv_market, iv_model;
    std::vector<LmStep> steps;
};

// Projected Levenberg-Marquardt on the IV residuals with xi0 profiled out by fit_xi0.
SliceFit calibrate_slice(const Slice& s, Family f, double decay, const std::vector<double>& init, const Bounds& b = {},
                         const LmOptions& o = {});

struct CalibResult {
    Family family;
    double decay;
    Bounds bounds;
    std::vector<SliceFit> slices;

    ForwardVarianceCurve curve() const;  // piecewise-flat xi0, one segment per fitted slice
    std::string to_json() const;
};

// Shortest maturity first; each slice starts from the previous solution.
CalibResult calibrate_term_structure(const MarketChain& chain, Family f, double decay, const std::vector<double>& init,
                                     const Bounds& b = {}, const LmOptions& o = {});

struct SyntheticSlice {
    double T, xi0;
    std::vector<double> params;
};
// Quotes priced by the expansion at strikes F e^{m} for each log-moneyness m.
MarketChain synthetic_chain(Family f, double decay, const std::vector<SyntheticSlice>& slices,
                            const std::vector<double>& moneyness);
std::string chain_csv(const MarketChain& c);

}  // namespace vixexp
