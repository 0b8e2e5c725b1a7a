#include "doctest.h"

#include <cmath>

#include "vixexp/error.hpp"
#include "vixexp/mathcore.hpp"
#include "vixexp/model.hpp"

using namespace vixexp;

TEST_CASE("kernel evaluation") {
    auto e = KernelSpec::exponential(2.0, 0.25);
    CHECK(kernel_eval(e, 1.0, 1.0 - 1e-14) == doctest::Approx(2.0));
    auto p = KernelSpec::power_law(1.0, 0.1);
    CHECK(kernel_eval(p, 2.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    auto e2 = KernelSpec::exponential(8.0, 10.0);
    CHECK(kernel_eval(e2, 0.3, 0.2) == doctest::Approx(8.0 * std::exp(-1.0)).epsilon(1e-14));
    CHECK_THROWS_AS(kernel_eval(p, 1.0, 1.0), Error);
    CHECK_THROWS_AS(KernelSpec::power_law(1.0, 0.5), Error);
    CHECK_THROWS_AS(KernelSpec::exponential(-1.0, 1.0), Error);
    // singular as t -> u
    CHECK(kernel_eval(p, 1.0, 1.0 - 1e-12) > 1e4);
}

TEST_CASE("mean VIX^2 and weights") {
    VixContract c{0.25, kVixWindow, 0.0};
    CHECK(mean_vix2(ForwardVarianceCurve::flat(0.24 * 0.24), c) == doctest::Approx(0.0576).epsilon(1e-15));

    double mid = c.T + c.delta / 2;
    ForwardVarianceCurve same({{0.0, 0.04}, {mid, 0.04}});
    CHECK(mean_vix2(same, c) == doctest::Approx(0.04).epsilon(1e-15));
    ForwardVarianceCurve step({{0.0, 0.04}, {mid, 0.08}});
    CHECK(mean_vix2(step, c) == doctest::Approx(0.06).epsilon(1e-14));
    CHECK(xi_weight(step, c, c.T + 0.01) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(xi_weight(step, c, mid + 0.01) == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(xi_weight(ForwardVarianceCurve::flat(0.05), c, c.T + 0.02) == doctest::Approx(1.0));

    double avg = 0;
    for (auto& pc : step.pieces(c.T, c.T + c.delta)) {
        auto g = gauss_legendre(8, pc.a, pc.b);
        avg += g.integrate([&](double u) { return xi_weight(step, c, u); });
    }
    CHECK(avg / c.delta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(xi_weight(step, c, c.T - 0.01), Error);

    ForwardVarianceCurve late({{0.5, 0.04}});
    CHECK_THROWS_AS(mean_vix2(late, c), Error);
}

TEST_CASE("mean VIX^2 is linear in curve levels") {
    VixContract c{0.2, kVixWindow, 0.0};
    std::vector<CurveSegment> a{{0.0, 0.03}, {0.21, 0.05}, {0.24, 0.02}};
    std::vector<CurveSegment> b{{0.0, 0.01}, {0.21, 0.07}, {0.24, 0.09}};
    std::vector<CurveSegment> s = a;
    for (size_t i = 0; i < s.size(); ++i) s[i].xi = 2 * a[i].xi + 3 * b[i].xi;
    double lhs = mean_vix2(ForwardVarianceCurve(s), c);
    double rhs = 2 * mean_vix2(ForwardVarianceCurve(a), c) + 3 * mean_vix2(ForwardVarianceCurve(b), c);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-14));
}

TEST_CASE("curve validation") {
    CHECK_THROWS_AS(ForwardVarianceCurve({{0.0, 0.04}, {0.0, 0.05}}), Error);
    CHECK_THROWS_AS(ForwardVarianceCurve({{0.0, 20.0}}), Error);
    CHECK_THROWS_AS(ForwardVarianceCurve({{0.0, 1e-8}}), Error);
}

TEST_CASE("mixed model validation") {
    MixedModel m{KernelSpec::exponential(10, 0.1), KernelSpec::exponential(2, 0.1), 0.2, ForwardVarianceCurve::flat(0.0576)};
    CHECK_NOTHROW(m.validate());
    m.k2 = KernelSpec::exponential(2, 0.2);
    CHECK_THROWS_AS(m.validate(), Error);
    m.k2 = KernelSpec::power_law(2, 0.1);
    CHECK_THROWS_AS(m.validate(), Error);
    m.k2 = KernelSpec::exponential(2, 0.1);
    m.lambda = 1.2;
    CHECK_THROWS_AS(m.validate(), Error);
}

TEST_CASE("model json round trip") {
    std::string txt = R"({"kind":"mixed_rbergomi","eta1":1.4,"eta2":0.7,"hurst":0.1,"lambda":0.3,"curve":[[0,0.0576],[0.5,0.06]]})";
    auto m = parse_model_json(txt);
    REQUIRE(std::holds_alternative<MixedModel>(m));
    auto& mm = std::get<MixedModel>(m);
    CHECK(mm.k1.vol == 1.4);
    CHECK(mm.k2.vol == 0.7);
    CHECK(mm.k1.kind == KernelKind::power_law);
    CHECK(mm.lambda == 0.3);
    CHECK(mm.curve.segments().size() == 2);
    auto back = parse_model_json(model_to_json(m));
    CHECK(model_to_json(back) == model_to_json(m));

    auto s = parse_model_json(R"({"kind":"bergomi","omega":2,"kappa":0.25,"curve":0.0576})");
    REQUIRE(std::holds_alternative<SingleModel>(s));
    CHECK(std::get<SingleModel>(s).kernel.decay == 0.25);
    CHECK(model_to_json(parse_model_json(model_to_json(s))) == model_to_json(s));

    auto r = parse_model_json(R"({"kind":"rbergomi","eta":1.0,"hurst":0.1,"curve":[[0,0.04]]})");
    CHECK(std::get<SingleModel>(r).kernel.kind == KernelKind::power_law);
    auto mb = parse_model_json(R"({"kind":"mixed_bergomi","omega1":10,"omega2":2,"kappa":0.1,"lambda":0.2,"curve":0.0576})");
    CHECK(std::get<MixedModel>(mb).k1.kind == KernelKind::exponential);

    CHECK_THROWS_AS(parse_model_json(R"({"kind":"heston"})"), Error);
    CHECK_THROWS_AS(parse_model_json("{not json"), Error);
    CHECK_THROWS_AS(parse_model_json(R"({"kind":"bergomi","omega":2,"curve":0.04})"), Error);
}
