#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vixexp/calib.hpp"
#include "vixexp/csvio.hpp"
#include "vixexp/error.hpp"
#include "vixexp/parallel.hpp"
#include "vixexp/smile.hpp"

namespace vixexp::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string x;
    while (std::getline(ss, x, sep))
        if (!x.empty()) out.push_back(x);
    return out;
}

double to_double(const std::string& s) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::usage, "not a number: '" + s + "'");
    }
}

}  // namespace

std::vector<double> parse_maturities(const std::string& s) {
    std::vector<double> out;
    for (auto& x : split(s, ',')) {
        bool months = x.back() == 'm';
        double v = to_double(months ? x.substr(0, x.size() - 1) : x);
        if (!(v > 0.0)) throw Error(Errc::usage, "maturities must be positive");
        out.push_back(months ? v / 12.0 : v);
    }
    if (out.empty()) throw Error(Errc::usage, "empty maturity list");
    return out;
}

std::vector<double> parse_grid(const std::string& s) {
    auto parts = split(s, ':');
    std::vector<double> out;
    if (parts.size() == 3) {
        double lo = to_double(parts[0]), hi = to_double(parts[1]);
        int n = static_cast<int>(to_double(parts[2]));
        if (n < 1) throw Error(Errc::usage, "grid needs at least one point");
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    } else {
        for (auto& x : split(s, ',')) out.push_back(to_double(x));
    }
    if (out.empty()) throw Error(Errc::usage, "empty strike grid");
    return out;
}

namespace {

struct Common {
    std::string model_path, out;
    std::string maturities = "1m,3m,6m";
    std::string grid = "-0.1:0.4:10";
    std::string component = "auto";
    std::string boundary = "moving";
    int N = 0;
    std::int64_t paths = 100000;
    int steps = 150;
    std::uint64_t seed = 1;
    bool full = false;
    bool plain = false;
    int quad_nodes = 120;
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("model", o.model_path, "model JSON file")->required();
    c->add_option("--T", o.maturities, "maturities: 1m,3m,6m (months) or years");
    c->add_option("--moneyness", o.grid, "log-moneyness grid lo:hi:n or list");
    c->add_option("--component", o.component, "expansion component")->check(CLI::IsMember({"auto", "1", "2"}));
    c->add_option("--boundary", o.boundary, "exercise boundary in the corrections")
        ->check(CLI::IsMember({"moving", "frozen"}));
    c->add_option("--N", o.N, "Hermite order (0 = optimal)")->check(CLI::Range(0, 25));
    c->add_option("--paths", o.paths, "Monte Carlo paths");
    c->add_option("--steps", o.steps, "Monte Carlo time steps");
    c->add_option("--seed", o.seed, "Monte Carlo seed");
    c->add_flag("--full-fidelity", o.full, "10^6 paths and 300 steps");
    c->add_flag("--no-antithetic", o.plain, "plain Monte Carlo sampling");
    c->add_option("--quad-nodes", o.quad_nodes, "quadrature nodes per dimension");
    c->add_option("--out", o.out, "output CSV")->required();
}

GridOpts grid_of(const Common& o) {
    GridOpts g;
    g.Ts = parse_maturities(o.maturities);
    g.moneyness = parse_grid(o.grid);
    g.component = o.component == "auto" ? 0 : std::stoi(o.component);
    g.N = o.N;
    g.boundary = o.boundary == "frozen" ? Boundary::frozen : Boundary::moving;
    g.mc.paths = o.full ? 1000000 : o.paths;
    g.mc.time_steps = o.full ? 300 : o.steps;
    g.mc.seed = o.seed;
    g.mc.antithetic = !o.plain;
    g.mc.validate();
    g.quad_nodes = o.quad_nodes;
    return g;
}

nlohmann::json echo(const Common& o, const GridOpts& g) {
    return {{"model_file", o.model_path},
            {"maturities", g.Ts},
            {"moneyness", g.moneyness},
            {"component", o.component},
            {"boundary", o.boundary},
            {"N", o.N},
            {"mc", {{"paths", g.mc.paths}, {"time_steps", g.mc.time_steps}, {"seed", g.mc.seed},
                    {"antithetic", g.mc.antithetic}, {"chunk", g.mc.chunk}, {"rng", "mt19937_64/splitmix64"}}},
            {"quad_nodes", g.quad_nodes},
            {"out", o.out}};
}

std::string stem(const std::string& path) {
    auto dot = path.rfind('.');
    auto slash = path.rfind('/');
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path;
    return path.substr(0, dot);
}

void finish(RunManifest& man, const std::string& out) {
    man.threads = thread_count();
    man.timestamp = utc_timestamp();
    write_file(out + ".manifest.json", man.to_json());
}

int cmd_smile(const Common& o, const std::string& method, RunManifest& man) {
    auto m = load_model_file(o.model_path);
    auto g = grid_of(o);
    man.config = echo(o, g);
    man.config["method"] = method;
    man.config["model"] = nlohmann::json::parse(model_to_json(m));
    if (method == "reference") man.seeds.push_back(g.mc.seed);
    std::ostringstream os;
    os << "k,T,iv,F,moneyness,method,flag\n";
    for (double T : g.Ts)
        for (auto& p : method_smile(m, method, T, g))
            os << fmt(p.k) << ',' << fmt(T) << ',' << fmt(p.iv) << ',' << fmt(p.F) << ',' << fmt(p.k - std::log(p.F))
               << ',' << method << ',' << (p.flag ? 1 : 0) << '\n';
    man.emit(o.out, os.str());
    finish(man, o.out);
    return 0;
}

int cmd_errors(const Common& o, const std::string& baseline, const std::string& against, RunManifest& man) {
    auto m = load_model_file(o.model_path);
    auto g = grid_of(o);
    auto methods = split(against, ',');
    for (auto& x : methods)
        if (std::find(kMethods.begin(), kMethods.end(), x) == kMethods.end())
            throw Error(Errc::usage, "unknown method '" + x + "' (expansion, hermite, weak-approx, reference)");
    man.config = echo(o, g);
    man.config["baseline"] = baseline;
    man.config["against"] = methods;
    man.config["model"] = nlohmann::json::parse(model_to_json(m));
    if (baseline == "reference" || std::count(methods.begin(), methods.end(), "reference")) man.seeds.push_back(g.mc.seed);

    struct Stat {
        double max = 0.0, min = std::numeric_limits<double>::infinity(), sum = 0.0, itm = 0.0;
        int n = 0, flagged = 0;
        void add(double e, bool itm_pt) {
            double a = std::abs(e);
            max = std::max(max, a);
            min = std::min(min, a);
            sum += a;
            ++n;
            if (itm_pt) itm = std::max(itm, a);
        }
    };
    std::map<std::pair<std::string, double>, Stat> stats;
    std::map<std::string, Stat> overall;
    std::ostringstream os;
    os << "T,k,moneyness,method,iv_baseline,iv,rel_error,flag\n";
    for (double T : g.Ts) {
        auto base = method_smile(m, baseline, T, g);
        std::vector<double> ks;
        for (auto& b : base) ks.push_back(b.k);
        double lnF = std::log(base.front().F);
        for (auto& meth : methods) {
            auto pts = meth == baseline ? base : method_smile(m, meth, T, g, ks);
            for (std::size_t i = 0; i < ks.size(); ++i) {
                bool flag = base[i].flag || pts[i].flag;
                double e = flag ? kNaN : (pts[i].iv - base[i].iv) / base[i].iv;
                double mny = ks[i] - lnF;
                os << fmt(T) << ',' << fmt(ks[i]) << ',' << fmt(mny) << ',' << meth << ',' << fmt(base[i].iv) << ','
                   << fmt(pts[i].iv) << ',' << fmt(e) << ',' << (flag ? 1 : 0) << '\n';
                if (flag) {
                    ++stats[{meth, T}].flagged;
                    ++overall[meth].flagged;
                    continue;
                }
                stats[{meth, T}].add(e, mny <= 1e-12);
                overall[meth].add(e, mny <= 1e-12);
            }
        }
    }
    os << "\nmethod,T,max_abs_rel_error,min_abs_rel_error,mean_abs_rel_error,itm_max_abs_rel_error,points,flagged\n";
    auto line = [&](const std::string& meth, const std::string& T, const Stat& s) {
        bool any = s.n > 0;
        os << meth << ',' << T << ',' << fmt(any ? s.max : kNaN) << ',' << fmt(any ? s.min : kNaN) << ','
           << fmt(any ? s.sum / s.n : kNaN) << ',' << fmt(s.itm) << ',' << s.n << ',' << s.flagged << '\n';
    };
    for (auto& meth : methods) {
        for (double T : g.Ts) line(meth, fmt(T), stats[{meth, T}]);
        line(meth, "all", overall[meth]);
    }
    man.emit(o.out, os.str());
    finish(man, o.out);
    return 0;
}

std::vector<double> parse_init(const std::string& s, Family f) {
    if (s.empty()) return is_mixed(f) ? std::vector<double>{1.0, 0.1, 0.5} : std::vector<double>{1.0};
    std::string text = s;
    if (s.find_first_of("[{") == std::string::npos) text = read_file(s);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        throw Error(Errc::usage, std::string("invalid --init json: ") + e.what());
    }
    if (j.is_object() && j.contains("params")) j = j["params"];
    if (!j.is_array()) throw Error(Errc::usage, "--init must be an array or {\"params\": [...]}");
    std::vector<double> v;
    for (auto& x : j) {
        if (!x.is_number()) throw Error(Errc::usage, "--init entries must be numbers");
        v.push_back(x.get<double>());
    }
    if (static_cast<int>(v.size()) != n_params(f))
        throw Error(Errc::usage, std::string(family_name(f)) + " needs " + std::to_string(n_params(f)) + " initial values");
    return v;
}

int cmd_calibrate(const std::string& chain_path, const std::string& family, double decay, const std::string& init,
                  const std::string& out, RunManifest& man) {
    Family f = parse_family(family);
    auto chain = load_chain(chain_path);
    for (auto& w : chain.warnings) std::cerr << "warning: " << w << '\n';
    auto x0 = parse_init(init, f);
    man.config = {{"chain_file", chain_path},       {"family", family}, {"decay", decay},
                  {"init", x0},                     {"out", out},       {"rows", chain.rows},
                  {"slices", chain.slices.size()}};
    auto res = calibrate_term_structure(chain, f, decay, x0);
    std::ostringstream os;
    os << "T,strike,k,iv_market,iv_model\n";
    bool failed = false;
    for (std::size_t i = 0; i < res.slices.size(); ++i) {
        auto& s = res.slices[i];
        if (!s.error.empty()) {
            std::cerr << "error: " << s.error << '\n';
            failed = true;
        }
        for (std::size_t q = 0; q < s.iv_model.size(); ++q)
            os << fmt(s.T) << ',' << fmt(s.strikes[q]) << ',' << fmt(std::log(s.strikes[q])) << ',' << fmt(s.iv_market[q])
               << ',' << fmt(s.iv_model[q]) << '\n';
    }
    man.emit(out, res.to_json());
    man.emit(stem(out) + ".smile.csv", os.str());
    finish(man, out);
    return failed ? exit_code(Errc::no_convergence) : 0;
}

int cmd_optimal_n(const std::string& model_path, const std::string& maturities, const std::string& out,
                  RunManifest& man) {
    auto m = load_model_file(model_path);
    auto mx = std::get_if<MixedModel>(&m);
    if (!mx) throw Error(Errc::family, "optimal-n needs a mixed model (mixed_bergomi or mixed_rbergomi)");
    auto Ts = parse_maturities(maturities);
    man.config = {{"model_file", model_path}, {"maturities", Ts}, {"out", out},
                  {"model", nlohmann::json::parse(model_to_json(m))}, {"N_max", 25}};
    std::ostringstream os;
    os << "T,N_opt,mse\n";
    for (double T : Ts) {
        auto p = mixed_proxy_params(*mx, VixContract{T, kVixWindow, 0.0});
        auto oc = optimal_order(p, default_component(p));
        os << fmt(T) << ',' << oc.N << ',' << fmt(oc.mse) << '\n';
    }
    man.emit(out, os.str());
    finish(man, out);
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"VIX futures and options: expansions, reference pricers and calibration (VIX in decimals)"};
    app.require_subcommand(1);
    RunManifest man;
    for (int i = 0; i < argc; ++i) man.argv.push_back(argv[i]);

    Common smile_o, err_o;
    std::string method = "expansion", baseline = "reference", against = "expansion,hermite,weak-approx";
    auto* smile = app.add_subcommand("smile", "implied-vol smile of one method");
    add_common(smile, smile_o);
    smile->add_option("--method", method, "expansion|hermite|weak-approx|reference")->check(CLI::IsMember(kMethods));

    auto* errors = app.add_subcommand("errors", "relative IV errors against a baseline method");
    add_common(errors, err_o);
    errors->add_option("--baseline", baseline, "baseline method")->check(CLI::IsMember(kMethods));
    errors->add_option("--against", against, "comma-separated methods");

    std::string chain_path, family, init, cal_out;
    double decay = 0.0;
    auto* cal = app.add_subcommand("calibrate", "sequential term-structure calibration of a chain CSV");
    cal->add_option("chain", chain_path, "chain CSV (maturity_years,future,strike,iv)")->required();
    cal->add_option("--family", family, "bergomi|rbergomi|mixed_bergomi|mixed_rbergomi")->required();
    cal->add_option("--decay", decay, "fixed kappa or H")->required();
    cal->add_option("--init", init, "initial parameters: JSON array, {\"params\": [...]}, or a JSON file");
    cal->add_option("--out", cal_out, "result JSON")->required();

    std::string on_model, on_T = "1m,3m,6m", on_out;
    auto* on = app.add_subcommand("optimal-n", "optimal Hermite order per maturity");
    on->add_option("model", on_model, "mixed model JSON file")->required();
    on->add_option("--T", on_T, "maturities");
    on->add_option("--out", on_out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_code(Errc::usage);
    }
    try {
        if (*smile) {
            man.command = "smile";
            return cmd_smile(smile_o, method, man);
        }
        if (*errors) {
            man.command = "errors";
            return cmd_errors(err_o, baseline, against, man);
        }
        if (*cal) {
            man.command = "calibrate";
            return cmd_calibrate(chain_path, family, decay, init, cal_out, man);
        }
        man.command = "optimal-n";
        return cmd_optimal_n(on_model, on_T, on_out, man);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    }
}

}  // namespace vixexp::cli
