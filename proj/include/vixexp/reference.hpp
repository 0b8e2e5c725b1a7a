#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vixexp/mixed.hpp"
#include "vixexp/model.hpp"
#include "vixexp/parallel.hpp"

namespace vixexp {

struct McConfig {
    std::int64_t paths = 100000;
    int time_steps = 150;  // trapezoid intervals over [T, T + delta]
    std::uint64_t seed = 1;
    bool antithetic = true;
    int chunk = 2048;  // samples per RNG stream; fixes the result independently of thread count

    void validate() const;
};

struct RefPrice {
    double price = 0.0;
    double std_error = 0.0;
};

// Futures plus calls and puts on a strike batch, all from one set of evaluations.
struct RefBatch {
    RefPrice future;
    std::vector<RefPrice> call, put;
};

// Gaussian-factorised quadrature for exponential kernels: outer Gauss-Legendre in z over
// [Phi^{-1}(eps), Phi^{-1}(1 - eps)] weighted by phi, split at the exercise point; inner Gauss-Legendre over u.
RefBatch quad_batch_exponential(const AnyModel& m, double T, double delta, const std::vector<double>& ks,
                                int nodes = 120, Exec exec = Exec::parallel);
double quad_price_exponential(const AnyModel& m, const VixContract& c, Payoff payoff, int nodes = 120);

// Monte Carlo on a (time_steps + 1)-point u-grid with exact Gaussian law of the unit-kernel factor, trapezoid in u.
// Samples are drawn in chunks of cfg.chunk, each with its own mt19937_64 stream seeded by splitmix64(seed, chunk).
// Any kernel; the exponential factor is rank one and needs no factorization.
RefBatch mc_batch(const AnyModel& m, double T, double delta, const std::vector<double>& ks, const McConfig& cfg,
                  Exec exec = Exec::parallel);
// Power-law kernels only.
RefPrice mc_price_powerlaw(const AnyModel& m, const VixContract& c, Payoff payoff, const McConfig& cfg);

// Covariance of X^u = int_0^T (u - t)^{H - 1/2} dW_t on the given u-grid (all u >= T).
Eigen::MatrixXd powerlaw_covariance(double hurst, double T, const std::vector<double>& us, int nodes = 120);
// Lower Cholesky factor with relative diagonal jitter 0, 1e-12, ..., 1e-8; covariance_conditioning if all fail.
Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& C);

enum class Engine { quadrature, monte_carlo };
const char* engine_name(Engine e);
Engine auto_engine(const AnyModel& m);

struct SmileRow {
    double k, T, F_ref, iv_ref, std_err;
    Engine engine;
    bool flag;  // price outside the no-arbitrage band; iv_ref is NaN
};

// How a strike grid is read: log-moneyness k - ln F (F of the pricer at hand) or absolute log-strike k.
enum class StrikeGrid { log_moneyness, log_strike };

// Rows per maturity in grid order; k is always the absolute log-strike.
std::vector<SmileRow> reference_smile(const AnyModel& m, const std::vector<double>& Ts, const std::vector<double>& grid,
                                      StrikeGrid mode = StrikeGrid::log_moneyness, const McConfig& cfg = {},
                                      int quad_nodes = 120, Exec exec = Exec::parallel);

std::string smile_csv(const std::vector<SmileRow>& rows);

}  // namespace vixexp
