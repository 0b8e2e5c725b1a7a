#pragma once

#include <string>
#include <variant>
#include <vector>

namespace vixexp {

inline constexpr double kVixWindow = 30.0 / 365.0;

enum class KernelKind { exponential, power_law };

// omega*exp(-kappa (u-t)) or eta*(u-t)^{H-1/2}.
struct KernelSpec {
    KernelKind kind = KernelKind::exponential;
    double vol = 1.0;    // omega or eta
    double decay = 1.0;  // kappa or H

    static KernelSpec exponential(double omega, double kappa);
    static KernelSpec power_law(double eta, double hurst);
    void validate() const;
};

struct CurveSegment {
    double t_start;
    double xi;
};

// Right-continuous piecewise-constant forward variance u -> xi_0^u.
class ForwardVarianceCurve {
public:
    ForwardVarianceCurve() = default;
    explicit ForwardVarianceCurve(std::vector<CurveSegment> segments);
    static ForwardVarianceCurve flat(double xi);

    const std::vector<CurveSegment>& segments() const { return segs_; }
    double operator()(double u) const;
    double start() const { return segs_.empty() ? 0.0 : segs_.front().t_start; }

    struct Piece {
        double a, b, xi;
    };
    // Constant pieces covering [a, b].
    std::vector<Piece> pieces(double a, double b) const;

private:
    std::vector<CurveSegment> segs_;
};

struct SingleModel {
    KernelSpec kernel;
    ForwardVarianceCurve curve;
};

struct MixedModel {
    KernelSpec k1, k2;  // same kind and decay
    double lambda = 0.5;
    ForwardVarianceCurve curve;

    void validate() const;
};

using AnyModel = std::variant<SingleModel, MixedModel>;

struct VixContract {
    double T = 1.0 / 12.0;
    double delta = kVixWindow;
    double k = 0.0;
};

double kernel_eval(const KernelSpec& spec, double u, double t);
double mean_vix2(const ForwardVarianceCurve& curve, const VixContract& c);
double xi_weight(const ForwardVarianceCurve& curve, const VixContract& c, double u);

// {"kind":"bergomi"|"rbergomi"|"mixed_bergomi"|"mixed_rbergomi", ...,"curve":[[t,xi],...]}
AnyModel parse_model_json(const std::string& text);
AnyModel load_model_file(const std::string& path);
std::string model_to_json(const AnyModel& m);

}  // namespace vixexp
