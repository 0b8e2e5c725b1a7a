#include "vixexp/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vixexp/error.hpp"

namespace vixexp {

using nlohmann::json;

KernelSpec KernelSpec::exponential(double omega, double kappa) {
    KernelSpec s{KernelKind::exponential, omega, kappa};
    s.validate();
    return s;
}

KernelSpec KernelSpec::power_law(double eta, double hurst) {
    KernelSpec s{KernelKind::power_law, eta, hurst};
    s.validate();
    return s;
}

void KernelSpec::validate() const {
    if (!(vol > 0.0) || !std::isfinite(vol)) throw Error(Errc::domain, "kernel vol-of-variance must be positive");
    if (kind == KernelKind::exponential) {
        if (!(decay > 0.0) || !std::isfinite(decay)) throw Error(Errc::domain, "kappa must be positive");
    } else if (!(decay > 0.0 && decay < 0.5)) {
        throw Error(Errc::domain, "hurst must lie in (0, 1/2)");
    }
}

ForwardVarianceCurve::ForwardVarianceCurve(std::vector<CurveSegment> segments) : segs_(std::move(segments)) {
    if (segs_.empty()) throw Error(Errc::domain, "empty forward variance curve");
    for (std::size_t i = 0; i < segs_.size(); ++i) {
        if (!(segs_[i].xi >= 1e-6 && segs_[i].xi <= 10.0))
            throw Error(Errc::domain, "forward variance level outside [1e-6, 10]");
        if (i > 0 && !(segs_[i].t_start > segs_[i - 1].t_start))
            throw Error(Errc::domain, "curve segment times must be strictly increasing");
    }
}

ForwardVarianceCurve ForwardVarianceCurve::flat(double xi) { return ForwardVarianceCurve({{0.0, xi}}); }

double ForwardVarianceCurve::operator()(double u) const {
    if (segs_.empty() || u < segs_.front().t_start) throw Error(Errc::curve_domain, "curve does not cover u");
    auto it = std::upper_bound(segs_.begin(), segs_.end(), u,
                               [](double v, const CurveSegment& s) { return v < s.t_start; });
    return std::prev(it)->xi;
}

std::vector<ForwardVarianceCurve::Piece> ForwardVarianceCurve::pieces(double a, double b) const {
    if (segs_.empty() || a < segs_.front().t_start) throw Error(Errc::curve_domain, "curve does not cover window");
    std::vector<Piece> out;
    for (std::size_t i = 0; i < segs_.size(); ++i) {
        double lo = std::max(a, segs_[i].t_start);
        double hi = i + 1 < segs_.size() ? std::min(b, segs_[i + 1].t_start) : b;
        if (hi > lo) out.push_back({lo, hi, segs_[i].xi});
    }
    return out;
}

void MixedModel::validate() const {
    k1.validate();
    k2.validate();
    if (k1.kind != k2.kind) throw Error(Errc::domain, "mixed kernels must share a family");
    if (k1.decay != k2.decay) throw Error(Errc::domain, "mixed kernels must share kappa or hurst");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(Errc::domain, "lambda must lie in [0, 1]");
}

double kernel_eval(const KernelSpec& spec, double u, double t) {
    if (!(t < u)) throw Error(Errc::domain, "kernel requires t < u");
    double tau = u - t;
    if (spec.kind == KernelKind::exponential) return spec.vol * std::exp(-spec.decay * tau);
    return spec.vol * std::pow(tau, spec.decay - 0.5);
}

double mean_vix2(const ForwardVarianceCurve& curve, const VixContract& c) {
    if (!(c.T > 0.0) || !(c.delta > 0.0)) throw Error(Errc::domain, "T and delta must be positive");
    double s = 0.0;
    for (auto& p : curve.pieces(c.T, c.T + c.delta)) s += p.xi * (p.b - p.a);
    return s / c.delta;
}

double xi_weight(const ForwardVarianceCurve& curve, const VixContract& c, double u) {
    if (!(u >= c.T && u <= c.T + c.delta)) throw Error(Errc::domain, "u outside the VIX window");
    return curve(u) / mean_vix2(curve, c);
}

namespace {

double need(const json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_number()) throw Error(Errc::parse, std::string("missing numeric field '") + key + "'");
    return j[key].get<double>();
}

ForwardVarianceCurve curve_from(const json& j) {
    if (!j.contains("curve")) throw Error(Errc::parse, "missing field 'curve'");
    const json& c = j["curve"];
    if (c.is_number()) return ForwardVarianceCurve::flat(c.get<double>());
    if (!c.is_array()) throw Error(Errc::parse, "curve must be a number or an array of [t, xi]");
    std::vector<CurveSegment> segs;
    for (auto& e : c) {
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
            throw Error(Errc::parse, "curve entries must be [t, xi]");
        segs.push_back({e[0].get<double>(), e[1].get<double>()});
    }
    return ForwardVarianceCurve(std::move(segs));
}

json curve_to(const ForwardVarianceCurve& c) {
    json a = json::array();
    for (auto& s : c.segments()) a.push_back({s.t_start, s.xi});
    return a;
}

}  // namespace

AnyModel parse_model_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(Errc::parse, std::string("invalid model json: ") + e.what());
    }
    if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string()) throw Error(Errc::parse, "model json needs a 'kind'");
    std::string kind = j["kind"];
    if (kind == "bergomi") return SingleModel{KernelSpec::exponential(need(j, "omega"), need(j, "kappa")), curve_from(j)};
    if (kind == "rbergomi") return SingleModel{KernelSpec::power_law(need(j, "eta"), need(j, "hurst")), curve_from(j)};
    MixedModel m;
    if (kind == "mixed_bergomi") {
        double kappa = need(j, "kappa");
        m.k1 = KernelSpec::exponential(need(j, "omega1"), kappa);
        m.k2 = KernelSpec::exponential(need(j, "omega2"), kappa);
    } else if (kind == "mixed_rbergomi") {
        double h = need(j, "hurst");
        m.k1 = KernelSpec::power_law(need(j, "eta1"), h);
        m.k2 = KernelSpec::power_law(need(j, "eta2"), h);
    } else {
        throw Error(Errc::family, "unknown model kind '" + kind + "'");
    }
    m.lambda = need(j, "lambda");
    m.curve = curve_from(j);
    m.validate();
    return m;
}

AnyModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open model file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str());
}

std::string model_to_json(const AnyModel& m) {
    json j;
    if (auto* s = std::get_if<SingleModel>(&m)) {
        bool e = s->kernel.kind == KernelKind::exponential;
        j["kind"] = e ? "bergomi" : "rbergomi";
        j[e ? "omega" : "eta"] = s->kernel.vol;
        j[e ? "kappa" : "hurst"] = s->kernel.decay;
        j["curve"] = curve_to(s->curve);
    } else {
        auto& x = std::get<MixedModel>(m);
        bool e = x.k1.kind == KernelKind::exponential;
        j["kind"] = e ? "mixed_bergomi" : "mixed_rbergomi";
        j[e ? "omega1" : "eta1"] = x.k1.vol;
        j[e ? "omega2" : "eta2"] = x.k2.vol;
        j[e ? "kappa" : "hurst"] = x.k1.decay;
        j["lambda"] = x.lambda;
        j["curve"] = curve_to(x.curve);
    }
    return j.dump();
}

}  // namespace vixexp
