#include "vixexp/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "vixexp/blackscholes.hpp"
#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"

namespace vixexp {

namespace {

constexpr double kTailEps = 1e-7;

struct Component {
    double vol, lambda;
};

struct Setup {
    KernelKind kind;
    double decay;
    std::vector<Component> comps;
    ForwardVarianceCurve curve;
};

Setup setup_of(const AnyModel& m) {
    if (auto s = std::get_if<SingleModel>(&m)) {
        s->kernel.validate();
        return {s->kernel.kind, s->kernel.decay, {{s->kernel.vol, 1.0}}, s->curve};
    }
    const auto& x = std::get<MixedModel>(m);
    x.validate();
    Setup st{x.k1.kind, x.k1.decay, {}, x.curve};
    if (x.lambda > 0.0) st.comps.push_back({x.k1.vol, x.lambda});
    if (x.lambda < 1.0) st.comps.push_back({x.k2.vol, 1.0 - x.lambda});
    return st;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RefPrice estimate(const std::vector<double>& y) {
    double n = static_cast<double>(y.size());
    double s = 0.0;
    for (double v : y) s += v;
    double mean = s / n, ss = 0.0;
    for (double v : y) ss += (v - mean) * (v - mean);
    return {mean, y.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

double payoff_value(const RefBatch& b, Payoff p, std::size_t i) {
    return p == Payoff::future ? b.future.price : p == Payoff::call ? b.call[i].price : b.put[i].price;
}

// Pathwise VIX values; vm holds the antithetic partners (empty otherwise).
struct McSamples {
    std::vector<double> vp, vm;
};

McSamples mc_samples(const Setup& st, double T, double delta, const McConfig& cfg, Exec exec) {
    cfg.validate();
    if (!(T > 0.0) || !(delta > 0.0)) throw Error(Errc::domain, "T and delta must be positive");
    int n = cfg.time_steps + 1;
    std::vector<double> us(n);
    for (int i = 0; i < n; ++i) us[i] = T + delta * i / cfg.time_steps;
    Eigen::VectorXd tw(n), d(n);
    for (int i = 0; i < n; ++i) tw[i] = st.curve(us[i]) * ((i == 0 || i == n - 1) ? 0.5 : 1.0) / cfg.time_steps;

    Eigen::MatrixXd L;
    if (st.kind == KernelKind::exponential) {
        double k = st.decay;
        double v = -std::expm1(-2.0 * k * T) / (2.0 * k);
        L.resize(n, 1);
        for (int i = 0; i < n; ++i) L(i, 0) = std::exp(-k * (us[i] - T)) * std::sqrt(v);
        d = L.col(0).cwiseAbs2();
    } else {
        auto C = powerlaw_covariance(st.decay, T, us);
        d = C.diagonal();
        L = cholesky_with_jitter(C);
    }

    std::int64_t S = cfg.antithetic ? cfg.paths / 2 : cfg.paths;
    int chunks = static_cast<int>((S + cfg.chunk - 1) / cfg.chunk);
    McSamples out;
    out.vp.resize(S);
    if (cfg.antithetic) out.vm.resize(S);
    std::vector<Eigen::VectorXd> drift;
    for (auto& c : st.comps) drift.push_back(-0.5 * c.vol * c.vol * d);

    for_each_index(chunks, exec, [&](int ci) {
        std::int64_t first = static_cast<std::int64_t>(ci) * cfg.chunk;
        int rows = static_cast<int>(std::min<std::int64_t>(cfg.chunk, S - first));
        std::mt19937_64 rng(splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(ci))));
        std::normal_distribution<double> nd;
        Eigen::MatrixXd Z(rows, L.cols());
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < L.cols(); ++c) Z(r, c) = nd(rng);
        Eigen::MatrixXd G = Z * L.transpose();
        auto vix = [&](const Eigen::VectorXd& g) {
            double v2 = 0.0;
            for (std::size_t c = 0; c < st.comps.size(); ++c)
                v2 += st.comps[c].lambda * tw.dot((st.comps[c].vol * g + drift[c]).array().exp().matrix());
            return std::sqrt(v2);
        };
        for (int r = 0; r < rows; ++r) {
            Eigen::VectorXd g = G.row(r).transpose();
            out.vp[first + r] = vix(g);
            if (cfg.antithetic) out.vm[first + r] = vix(-g);
        }
    });
    return out;
}

template <class F>
RefPrice sample_estimate(const McSamples& s, F&& f) {
    std::vector<double> y(s.vp.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = s.vm.empty() ? f(s.vp[i]) : 0.5 * (f(s.vp[i]) + f(s.vm[i]));
    return estimate(y);
}

RefBatch batch_from_samples(const McSamples& s, const std::vector<double>& ks) {
    RefBatch b;
    b.future = sample_estimate(s, [](double v) { return v; });
    for (double k : ks) {
        double K = std::exp(k);
        b.call.push_back(sample_estimate(s, [K](double v) { return std::max(v - K, 0.0); }));
        b.put.push_back(sample_estimate(s, [K](double v) { return std::max(K - v, 0.0); }));
    }
    return b;
}

// Deterministic VIX as a function of the common Gaussian z for exponential kernels.
struct QuadVix {
    std::vector<double> e, w;  // e^{-kappa (u - T)} sqrt(v) and xi(u) du / delta on the u-rule
    std::vector<Component> comps;

    QuadVix(const Setup& st, double T, double delta, int nodes) : comps(st.comps) {
        double k = st.decay;
        double v = -std::expm1(-2.0 * k * T) / (2.0 * k);
        for (auto& p : st.curve.pieces(T, T + delta)) {
            auto g = gauss_legendre(nodes, p.a, p.b);
            for (std::size_t i = 0; i < g.size(); ++i) {
                e.push_back(std::exp(-k * (g.nodes[i] - T)) * std::sqrt(v));
                w.push_back(g.weights[i] * p.xi / delta);
            }
        }
    }
    double operator()(double z) const {
        double v2 = 0.0;
        for (auto& c : comps) {
            double s = 0.0;
            for (std::size_t i = 0; i < e.size(); ++i) s += w[i] * std::exp(c.vol * e[i] * (z - 0.5 * c.vol * e[i]));
            v2 += c.lambda * s;
        }
        return std::sqrt(v2);
    }
};

}  // namespace

void McConfig::validate() const {
    if (paths < 1000) throw Error(Errc::domain, "Monte Carlo needs at least 1000 paths");
    if (time_steps < 10) throw Error(Errc::domain, "Monte Carlo needs at least 10 time steps");
    if (chunk < 1) throw Error(Errc::domain, "chunk size must be positive");
}

RefBatch quad_batch_exponential(const AnyModel& m, double T, double delta, const std::vector<double>& ks, int nodes,
                                Exec exec) {
    auto st = setup_of(m);
    if (st.kind != KernelKind::exponential)
        throw Error(Errc::wrong_pricer, "quadrature reference needs exponential kernels; use Monte Carlo");
    if (!(T > 0.0) || !(delta > 0.0)) throw Error(Errc::domain, "T and delta must be positive");
    if (nodes < 2) throw Error(Errc::domain, "need at least 2 quadrature nodes");
    QuadVix vix(st, T, delta, nodes);
    double zlo = norm_inv_cdf(kTailEps), zhi = -zlo;
    double mass = 1.0 - 2.0 * kTailEps;
    auto integrate = [&](double a, double b, auto&& f) {
        if (!(b > a)) return 0.0;
        auto g = gauss_legendre(nodes, a, b);
        return g.integrate([&](double z) { return f(z) * norm_pdf(z); }) / mass;
    };
    int nk = static_cast<int>(ks.size());
    RefBatch out;
    out.call.resize(nk);
    out.put.resize(nk);
    for_each_index(nk + 1, exec, [&](int i) {
        if (i == nk) {
            out.future.price = integrate(zlo, zhi, vix);
            return;
        }
        double K = std::exp(ks[i]);
        auto f = [&](double z) { return vix(z) - K; };
        double zs;
        if (f(zhi) <= 0.0)
            zs = zhi;
        else if (f(zlo) >= 0.0)
            zs = zlo;
        else
            zs = find_root(f, zlo, zhi, 1e-14);
        out.call[i].price = integrate(zs, zhi, f);
        out.put[i].price = integrate(zlo, zs, [&](double z) { return -f(z); });
    });
    return out;
}

double quad_price_exponential(const AnyModel& m, const VixContract& c, Payoff payoff, int nodes) {
    return payoff_value(quad_batch_exponential(m, c.T, c.delta, {c.k}, nodes), payoff, 0);
}

Eigen::MatrixXd powerlaw_covariance(double H, double T, const std::vector<double>& us, int nodes) {
    if (!(H > 0.0 && H < 0.5)) throw Error(Errc::domain, "Hurst exponent must lie in (0, 1/2)");
    int n = static_cast<int>(us.size());
    for (double u : us)
        if (!(u >= T)) throw Error(Errc::domain, "covariance grid must lie at or after T");
    // s = tau^{2H}, tau = T - t: dt = tau^{1 - 2H} / (2H) ds
    auto g = gauss_legendre(nodes, 0.0, std::pow(T, 2 * H));
    int q = static_cast<int>(g.size());
    std::vector<double> tau(q), jac(q);
    for (int j = 0; j < q; ++j) {
        tau[j] = std::pow(g.nodes[j], 1.0 / (2 * H));
        jac[j] = g.weights[j] * std::pow(tau[j], 1.0 - 2 * H) / (2 * H);
    }
    Eigen::MatrixXd E(n, q);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < q; ++j) E(i, j) = std::pow(us[i] - T + tau[j], H - 0.5);
    Eigen::MatrixXd C(n, n);
    for (int i = 0; i < n; ++i) {
        C(i, i) = (std::pow(us[i], 2 * H) - std::pow(us[i] - T, 2 * H)) / (2 * H);
        for (int k = i + 1; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < q; ++j) s += jac[j] * E(i, j) * E(k, j);
            C(i, k) = C(k, i) = s;
        }
    }
    return C;
}

Eigen::MatrixXd cholesky_with_jitter(const Eigen::MatrixXd& C) {
    double scale = C.diagonal().cwiseAbs().maxCoeff();
    for (double jit : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
        Eigen::MatrixXd A = C;
        A.diagonal().array() += jit * scale;
        Eigen::LLT<Eigen::MatrixXd> llt(A);
        if (llt.info() == Eigen::Success) return llt.matrixL();
    }
    throw Error(Errc::covariance_conditioning, "covariance not positive definite after 1e-8 relative jitter");
}

RefBatch mc_batch(const AnyModel& m, double T, double delta, const std::vector<double>& ks, const McConfig& cfg,
                  Exec exec) {
    return batch_from_samples(mc_samples(setup_of(m), T, delta, cfg, exec), ks);
}

RefPrice mc_price_powerlaw(const AnyModel& m, const VixContract& c, Payoff payoff, const McConfig& cfg) {
    if (setup_of(m).kind != KernelKind::power_law)
        throw Error(Errc::wrong_pricer, "Monte Carlo reference is for power-law kernels; use quadrature");
    auto b = mc_batch(m, c.T, c.delta, {c.k}, cfg);
    return payoff == Payoff::future ? b.future : payoff == Payoff::call ? b.call[0] : b.put[0];
}

const char* engine_name(Engine e) { return e == Engine::quadrature ? "quadrature" : "monte_carlo"; }

Engine auto_engine(const AnyModel& m) {
    return setup_of(m).kind == KernelKind::exponential ? Engine::quadrature : Engine::monte_carlo;
}

std::vector<SmileRow> reference_smile(const AnyModel& m, const std::vector<double>& Ts, const std::vector<double>& grid,
                                      StrikeGrid mode, const McConfig& cfg, int quad_nodes, Exec exec) {
    auto st = setup_of(m);
    Engine eng = auto_engine(m);
    std::vector<SmileRow> rows;
    for (double T : Ts) {
        RefBatch b;
        std::vector<double> ks;
        double F;
        if (eng == Engine::quadrature) {
            F = quad_batch_exponential(m, T, kVixWindow, {}, quad_nodes, exec).future.price;
            for (double g : grid) ks.push_back(mode == StrikeGrid::log_moneyness ? g + std::log(F) : g);
            b = quad_batch_exponential(m, T, kVixWindow, ks, quad_nodes, exec);
        } else {
            auto s = mc_samples(st, T, kVixWindow, cfg, exec);
            F = sample_estimate(s, [](double v) { return v; }).price;
            for (double g : grid) ks.push_back(mode == StrikeGrid::log_moneyness ? g + std::log(F) : g);
            b = batch_from_samples(s, ks);
        }
        F = b.future.price;
        double x = std::log(F);
        for (std::size_t i = 0; i < ks.size(); ++i) {
            SmileRow r{ks[i], T, F, std::numeric_limits<double>::quiet_NaN(), 0.0, eng, false};
            bool otm_call = ks[i] >= x;
            const RefPrice& p = otm_call ? b.call[i] : b.put[i];
            try {
                r.iv_ref = implied_vol(p.price, x, ks[i], T, otm_call ? OptionKind::call : OptionKind::put);
                r.std_err = p.std_error / vega({x, ks[i], r.iv_ref, T});
            } catch (const Error& e) {
                if (e.code() != Errc::arbitrage && e.code() != Errc::no_convergence) throw;
                r.flag = true;
                r.std_err = std::numeric_limits<double>::quiet_NaN();
            }
            rows.push_back(r);
        }
    }
    return rows;
}

std::string smile_csv(const std::vector<SmileRow>& rows) {
    std::ostringstream os;
    os.precision(17);
    os << "k,T,F_ref,iv_ref,std_err,engine,flag\n";
    for (auto& r : rows)
        os << r.k << ',' << r.T << ',' << r.F_ref << ',' << r.iv_ref << ',' << r.std_err << ',' << engine_name(r.engine)
           << ',' << (r.flag ? 1 : 0) << '\n';
    return os.str();
}

}  // namespace vixexp
