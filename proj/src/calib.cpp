#include "vixexp/calib.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/Dense>

#include "json.hpp"
#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"
#include "vixexp/single.hpp"

namespace vixexp {

Family parse_family(const std::string& name) {
    if (name == "bergomi") return Family::bergomi;
    if (name == "rbergomi") return Family::rbergomi;
    if (name == "mixed_bergomi") return Family::mixed_bergomi;
    if (name == "mixed_rbergomi") return Family::mixed_rbergomi;
    throw Error(Errc::family, "unknown family '" + name + "' (bergomi, rbergomi, mixed_bergomi, mixed_rbergomi)");
}

const char* family_name(Family f) {
    switch (f) {
        case Family::bergomi: return "bergomi";
        case Family::rbergomi: return "rbergomi";
        case Family::mixed_bergomi: return "mixed_bergomi";
        default: return "mixed_rbergomi";
    }
}

bool is_mixed(Family f) { return f == Family::mixed_bergomi || f == Family::mixed_rbergomi; }

KernelKind kernel_kind(Family f) {
    return f == Family::bergomi || f == Family::mixed_bergomi ? KernelKind::exponential : KernelKind::power_law;
}

int n_params(Family f) { return is_mixed(f) ? 3 : 1; }

namespace {

std::vector<std::string> param_names(Family f) {
    switch (f) {
        case Family::bergomi: return {"omega"};
        case Family::rbergomi: return {"eta"};
        case Family::mixed_bergomi: return {"omega1", "omega2", "lambda"};
        default: return {"eta1", "eta2", "lambda"};
    }
}

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_number(const std::string& field, std::size_t line) {
    std::string f = trim(field);
    double v = 0.0;
    auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
    if (ec != std::errc() || p != f.data() + f.size() || f.empty() || !std::isfinite(v))
        throw Error(Errc::parse, "line " + std::to_string(line) + ": '" + f + "' is not a number");
    return v;
}

KernelSpec kernel(Family f, double vol, double decay) {
    return kernel_kind(f) == KernelKind::exponential ? KernelSpec::exponential(vol, decay)
                                                     : KernelSpec::power_law(vol, decay);
}

}  // namespace

MarketChain parse_chain(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::size_t ln = 0;
    bool header = false;
    MarketChain c;
    std::map<double, Slice> by_T;
    std::map<double, std::map<double, double>> quotes;
    double last_T = -1.0;
    bool warned_order = false, warned_points = false;
    while (std::getline(in, line)) {
        ++ln;
        line = trim(line);
        if (line.empty()) continue;
        if (!header) {
            if (line != "maturity_years,future,strike,iv")
                throw Error(Errc::parse, "line " + std::to_string(ln) + ": expected header maturity_years,future,strike,iv");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 4) throw Error(Errc::parse, "line " + std::to_string(ln) + ": expected 4 fields");
        double T = parse_number(f[0], ln), F = parse_number(f[1], ln), K = parse_number(f[2], ln),
               iv = parse_number(f[3], ln);
        if (!(T > 0.0) || !(F > 0.0) || !(K > 0.0) || !(iv > 0.0))
            throw Error(Errc::parse, "line " + std::to_string(ln) + ": values must be positive");
        if (F > 2.0 || K > 2.0) {
            if (F > 2.0) F /= 100.0;
            if (K > 2.0) K /= 100.0;
            if (!warned_points) c.warnings.push_back("values above 2 read as VIX index points and divided by 100");
            warned_points = true;
        }
        ++c.rows;
        if (T < last_T && !warned_order) {
            c.warnings.push_back("maturities not sorted; slices reordered");
            warned_order = true;
        }
        last_T = T;
        auto it = by_T.find(T);
        if (it == by_T.end())
            by_T.emplace(T, Slice{T, F, {}});
        else if (it->second.future != F)
            c.warnings.push_back("line " + std::to_string(ln) + ": futures level differs within maturity; first kept");
        auto& q = quotes[T];
        if (q.count(K)) c.warnings.push_back("line " + std::to_string(ln) + ": duplicate (T, strike); last row wins");
        q[K] = iv;
    }
    if (c.rows == 0) throw Error(Errc::empty_chain, "chain has no quotes");
    for (auto& [T, s] : by_T) {
        for (auto& [K, iv] : quotes[T]) s.quotes.push_back({K, iv});
        c.slices.push_back(std::move(s));
    }
    return c;
}

MarketChain load_chain(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error(Errc::io, "cannot read chain file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_chain(ss.str());
}

SliceModel::SliceModel(Family f, double decay, double T, const QuadSpec& q) : f_(f), decay_(decay), T_(T) {
    kernel(f, 1.0, decay).validate();
    if (!(T > 0.0)) throw Error(Errc::domain, "maturity must be positive");
    um_ = unit_moments(kernel_kind(f), decay, ForwardVarianceCurve::flat(1.0), VixContract{T, kVixWindow, 0.0}, q);
}

MixedProxyParams SliceModel::mixed(const std::vector<double>& p, double xi0) const {
    UnitMoments um = um_;
    um.L += std::log(xi0);
    return MixedProxyParams::from_moments(um, p[0], p[1], p[2], T_);
}

namespace {

void check_params(Family f, const std::vector<double>& p, double xi0) {
    if (static_cast<int>(p.size()) != n_params(f))
        throw Error(Errc::domain, std::string(family_name(f)) + " takes " + std::to_string(n_params(f)) + " parameters");
    if (!(xi0 > 0.0)) throw Error(Errc::domain, "xi0 must be positive");
}

}  // namespace

int SliceModel::order(const std::vector<double>& p) const {
    check_params(f_, p, 1.0);
    if (!is_mixed(f_)) return 0;
    auto mp = mixed(p, 1.0);
    return optimal_order(mp, default_component(mp)).N;
}

double SliceModel::future(const std::vector<double>& p, double xi0, int N) const {
    check_params(f_, p, xi0);
    VixContract c{T_, kVixWindow, 0.0};
    if (!is_mixed(f_)) {
        UnitMoments um = um_;
        um.L += std::log(xi0);
        return proxy_prices(proxy_from_moments(um, p[0], T_), gammas_from_moments(um, p[0]), c).future;
    }
    auto mp = mixed(p, xi0);
    int j = default_component(mp);
    if (N == 0) N = optimal_order(mp, j).N;
    auto layer = hermite_weights(mp, 0.0, N);
    return hermite_prices(layer, mp, c, j).future;
}

std::vector<double> SliceModel::ivs(const std::vector<double>& p, double xi0, const std::vector<double>& ks,
                                    int N) const {
    check_params(f_, p, xi0);
    std::vector<double> out;
    if (!is_mixed(f_)) {
        UnitMoments um = um_;
        um.L += std::log(xi0);
        auto pp = proxy_from_moments(um, p[0], T_);
        auto g = gammas_from_moments(um, p[0]);
        for (double k : ks) out.push_back(iv_expansion(pp, g, VixContract{T_, kVixWindow, k}));
        return out;
    }
    auto mp = mixed(p, xi0);
    int j = default_component(mp);
    if (N == 0) N = optimal_order(mp, j).N;
    auto layer = hermite_weights(mp, 0.0, N);
    double F = hermite_prices(layer, mp, VixContract{T_, kVixWindow, 0.0}, j).future;
    for (double k : ks) {
        VixContract c{T_, kVixWindow, k};
        layer.k = k;
        layer.A = root_A(mp, k);
        auto th = theta_and_coords(layer, mp, c, j, F);
        out.push_back(iv_expansion_mixed(layer, mp, c, j, th));
    }
    return out;
}

double SliceModel::iv(const std::vector<double>& p, double xi0, double k, int N) const { return ivs(p, xi0, {k}, N)[0]; }

AnyModel SliceModel::model(const std::vector<double>& p, double xi0) const {
    check_params(f_, p, xi0);
    auto curve = ForwardVarianceCurve::flat(xi0);
    if (!is_mixed(f_)) return SingleModel{kernel(f_, p[0], decay_), curve};
    return MixedModel{kernel(f_, p[0], decay_), kernel(f_, p[1], decay_), p[2], curve};
}

double fit_xi0(const SliceModel& sm, const std::vector<double>& p, double future, const Bounds& b, int N) {
    if (!(future > 0.01 && future < 2.0)) throw Error(Errc::domain, "futures level must lie in (0.01, 2) VIX decimals");
    if (is_mixed(sm.family()) && N == 0) N = sm.order(p);
    auto f = [&](double lx) { return std::log(sm.future(p, std::exp(lx), N)) - std::log(future); };
    double lo = std::log(b.xi_lo), hi = std::log(b.xi_hi);
    double flo = f(lo), fhi = f(hi);
    if (flo > 0.0 || fhi < 0.0)
        throw Error(Errc::futures_unattainable, "futures level " + std::to_string(future) +
                                                    " outside the model range over the xi0 bounds");
    return std::exp(find_root(f, lo, hi, 1e-14));
}

namespace {

struct Problem {
    const Slice& s;
    SliceModel sm;
    Bounds b;
    std::vector<double> ks, iv;

    Problem(const Slice& s_, Family f, double decay, const Bounds& b_) : s(s_), sm(f, decay, s_.T), b(b_) {
        for (auto& q : s.quotes) {
            ks.push_back(std::log(q.strike));
            iv.push_back(q.iv);
        }
    }
    // Residuals iv_model - iv_market; false when the model cannot be evaluated here.
    bool residuals(const Eigen::VectorXd& x, int N, Eigen::VectorXd& r, double* xi_out = nullptr,
                   std::vector<double>* model = nullptr) const {
        try {
            std::vector<double> p(x.data(), x.data() + x.size());
            double xi = fit_xi0(sm, p, s.future, b, N);
            auto m = sm.ivs(p, xi, ks, N);
            r.resize(static_cast<int>(m.size()));
            for (std::size_t i = 0; i < m.size(); ++i) r[i] = m[i] - iv[i];
            if (!r.allFinite()) return false;
            if (xi_out) *xi_out = xi;
            if (model) *model = m;
            return true;
        } catch (const Error&) {
            return false;
        }
    }
};

}  // namespace

SliceFit calibrate_slice(const Slice& s, Family f, double decay, const std::vector<double>& init, const Bounds& b,
                         const LmOptions& o) {
    int n = n_params(f);
    if (static_cast<int>(init.size()) != n)
        throw Error(Errc::domain, std::string(family_name(f)) + " takes " + std::to_string(n) + " parameters");
    Eigen::VectorXd lo(n), hi(n), x(n);
    for (int i = 0; i < n; ++i) {
        bool lam = is_mixed(f) && i == 2;
        lo[i] = lam ? b.lambda_lo : b.vol_lo;
        hi[i] = lam ? b.lambda_hi : b.vol_hi;
        x[i] = init[i];
        if (!(x[i] >= lo[i] && x[i] <= hi[i])) throw Error(Errc::domain, "initial guess outside the bounds");
    }
    if (s.quotes.size() < 3) throw Error(Errc::domain, "a slice needs at least 3 quotes");

    Problem pb(s, f, decay, b);
    SliceFit fit;
    fit.T = s.T;
    fit.future = s.future;
    for (auto& q : s.quotes) {
        fit.strikes.push_back(q.strike);
        fit.iv_market.push_back(q.iv);
    }
    auto order = [&](const Eigen::VectorXd& v) {
        return pb.sm.order(std::vector<double>(v.data(), v.data() + v.size()));
    };

    double mu = 1e-3;
    try {
        for (int it = 0; it < o.max_iter; ++it) {
            int N = order(x);
            Eigen::VectorXd r;
            if (!pb.residuals(x, N, r)) throw Error(Errc::no_convergence, "model not evaluable at the current point");
            double fx = r.squaredNorm();
            fit.iterations = it + 1;
            if (fx < 1e-28) {
                fit.converged = true;
                break;
            }
            Eigen::MatrixXd J(r.size(), n);
            for (int p = 0; p < n; ++p) {
                double h = o.fd_step * std::max(1.0, std::abs(x[p]));
                if (x[p] + h > hi[p]) h = -h;
                Eigen::VectorXd xp = x, rp;
                xp[p] += h;
                if (!pb.residuals(xp, N, rp)) {
                    h = -h;
                    xp[p] = x[p] + h;
                    if (!pb.residuals(xp, N, rp)) throw Error(Errc::no_convergence, "Jacobian not evaluable");
                }
                J.col(p) = (rp - r) / h;
            }
            Eigen::MatrixXd A = J.transpose() * J;
            Eigen::VectorXd g = J.transpose() * r;
            Eigen::VectorXd D = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));
            bool accepted = false;
            double step = 0.0;
            while (mu < 1e12) {
                Eigen::MatrixXd M = A;
                M.diagonal() += mu * D;
                Eigen::VectorXd xn = (x - M.ldlt().solve(g)).cwiseMax(lo).cwiseMin(hi);
                Eigen::VectorXd rn;
                if (pb.residuals(xn, N, rn) && rn.squaredNorm() < fx) {
                    fit.steps.push_back({fx, rn.squaredNorm(), N});
                    step = (xn - x).norm() / (x.norm() + o.step_tol);
                    x = xn;
                    mu = std::max(mu / 3.0, 1e-12);
                    accepted = true;
                    break;
                }
                mu *= 4.0;
            }
            if (!accepted || step < o.step_tol) {
                fit.converged = true;
                break;
            }
        }
    } catch (const Error& e) {
        fit.error = e.what();
    }

    fit.params.assign(x.data(), x.data() + n);
    try {
        fit.N = order(x);
        Eigen::VectorXd r;
        if (!pb.residuals(x, fit.N, r, &fit.xi0, &fit.iv_model))
            throw Error(Errc::no_convergence, "model not evaluable at the final point");
        fit.rmse = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    } catch (const Error& e) {
        if (fit.error.empty()) fit.error = e.what();
        fit.rmse = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

ForwardVarianceCurve CalibResult::curve() const {
    std::vector<CurveSegment> segs;
    for (auto& s : slices) {
        if (!s.error.empty()) continue;
        segs.push_back({segs.empty() ? 0.0 : s.T, s.xi0});
    }
    if (segs.empty()) throw Error(Errc::no_convergence, "no calibrated slice");
    return ForwardVarianceCurve(segs);
}

std::string CalibResult::to_json() const {
    using nlohmann::json;
    json j;
    j["family"] = family_name(family);
    j["decay"] = decay;
    j["decay_name"] = kernel_kind(family) == KernelKind::exponential ? "kappa" : "hurst";
    j["n_policy"] = "optimal order per outer iteration, frozen within the iteration";
    j["bounds"] = {{"vol", {bounds.vol_lo, bounds.vol_hi}},
                   {"lambda", {bounds.lambda_lo, bounds.lambda_hi}},
                   {"xi0", {bounds.xi_lo, bounds.xi_hi}}};
    j["slices"] = json::array();
    auto names = param_names(family);
    for (auto& s : slices) {
        json e;
        e["T"] = s.T;
        e["future"] = s.future;
        e["xi0"] = s.xi0;
        e["params"] = s.params;
        for (std::size_t i = 0; i < s.params.size() && i < names.size(); ++i) e[names[i]] = s.params[i];
        e["rmse"] = std::isfinite(s.rmse) ? json(s.rmse) : json(nullptr);
        e["iterations"] = s.iterations;
        e["N"] = s.N;
        e["converged"] = s.converged;
        e["window_overlap"] = s.window_overlap;
        if (!s.error.empty()) e["error"] = s.error;
        j["slices"].push_back(e);
    }
    return j.dump(2);
}

CalibResult calibrate_term_structure(const MarketChain& chain, Family f, double decay, const std::vector<double>& init,
                                     const Bounds& b, const LmOptions& o) {
    if (chain.slices.empty()) throw Error(Errc::empty_chain, "chain has no slices");
    CalibResult res{f, decay, b, {}};
    std::vector<double> start = init;
    for (std::size_t i = 0; i < chain.slices.size(); ++i) {
        const auto& s = chain.slices[i];
        SliceFit fit;
        try {
            fit = calibrate_slice(s, f, decay, start, b, o);
        } catch (const Error& e) {
            fit.T = s.T;
            fit.future = s.future;
            fit.params = start;
            fit.rmse = std::numeric_limits<double>::quiet_NaN();
            fit.error = e.what();
        }
        if (!fit.error.empty()) fit.error = "slice " + std::to_string(i) + ": " + fit.error;
        fit.window_overlap = i + 1 < chain.slices.size() && s.T + kVixWindow > chain.slices[i + 1].T;
        if (fit.error.empty()) start = fit.params;
        res.slices.push_back(std::move(fit));
    }
    return res;
}

MarketChain synthetic_chain(Family f, double decay, const std::vector<SyntheticSlice>& slices,
                            const std::vector<double>& moneyness) {
    MarketChain c;
    for (auto& g : slices) {
        SliceModel sm(f, decay, g.T);
        int N = sm.order(g.params);
        double F = sm.future(g.params, g.xi0, N);
        std::vector<double> ks;
        for (double m : moneyness) ks.push_back(std::log(F) + m);
        auto iv = sm.ivs(g.params, g.xi0, ks, N);
        Slice s{g.T, F, {}};
        for (std::size_t i = 0; i < ks.size(); ++i) s.quotes.push_back({std::exp(ks[i]), iv[i]});
        c.rows += s.quotes.size();
        c.slices.push_back(std::move(s));
    }
    std::sort(c.slices.begin(), c.slices.end(), [](const Slice& a, const Slice& b) { return a.T < b.T; });
    return c;
}

std::string chain_csv(const MarketChain& c) {
    std::ostringstream os;
    os.precision(17);
    os << "maturity_years,future,strike,iv\n";
    for (auto& s : c.slices)
        for (auto& q : s.quotes) os << s.T << ',' << s.future << ',' << q.strike << ',' << q.iv << '\n';
    return os.str();
}

}  // namespace vixexp
