#include <cstdio>
#include <cstring>

#include "harness.hpp"
#include "vixexp/moments.hpp"
#include "vixexp/parallel.hpp"

using namespace vixexp;
using namespace vixexp::bench;

namespace {

const double kXi = 0.24 * 0.24;

template <class F>
void serial_vs_parallel(const char* name, F&& f) {
    auto a = f(Exec::serial), b = f(Exec::parallel);
    double ts = seconds_per_call([&] { f(Exec::serial); }, 0.0, 3);
    double tp = seconds_per_call([&] { f(Exec::parallel); }, 0.0, 3);
    std::printf("%-34s %10.4f %10.4f %8.2fx  %s\n", name, ts, tp, ts / tp, a == b ? "identical" : "DIFFERENT");
}

}  // namespace

int main(int argc, char** argv) {
    McConfig mc;
    if (argc > 1 && std::strcmp(argv[1], "--full-fidelity") == 0) {
        mc.paths = 1000000;
        mc.time_steps = 300;
    }
    auto flat = ForwardVarianceCurve::flat(kXi);
    std::printf("threads: %d\n\n", thread_count());
    std::printf("%-34s %10s %10s %9s\n", "kernel (serial vs parallel)", "serial s", "parallel s", "speedup");
    serial_vs_parallel("unit moments, power law 120x120", [&](Exec e) {
        auto u = unit_moments(KernelKind::power_law, 0.1, flat, VixContract{0.25, kVixWindow, 0.0}, {}, e);
        return std::vector<double>{u.m0, u.s0sq, u.a2, u.ac, u.c2};
    });
    std::vector<double> ks;
    for (int i = 0; i < 10; ++i) ks.push_back(std::log(0.2) + 0.05 * i);
    AnyModel s1 = MixedModel{KernelSpec::exponential(10, 0.1), KernelSpec::exponential(2, 0.1), 0.2, flat};
    serial_vs_parallel("quadrature reference, 10 strikes", [&](Exec e) {
        auto b = quad_batch_exponential(s1, 0.25, kVixWindow, ks, 120, e);
        return std::vector<double>{b.future.price, b.call[0].price, b.call[9].price};
    });
    AnyModel rough = SingleModel{KernelSpec::power_law(1.0, 0.1), flat};
    serial_vs_parallel("Monte Carlo reference, desk scale", [&](Exec e) {
        auto b = mc_batch(rough, 1.0 / 12, kVixWindow, ks, mc, e);
        return std::vector<double>{b.future.price, b.future.std_error, b.call[0].price};
    });

    std::printf("\n%-34s %12s %12s %10s\n", "smile (10 strikes)", "expansion s", "reference s", "ratio");
    std::vector<std::pair<std::string, AnyModel>> cases{
        {"bergomi omega=2 kappa=0.25", SingleModel{KernelSpec::exponential(2.0, 0.25), flat}},
        {"mixed bergomi scenario 1", s1},
        {"rbergomi eta=1 H=0.1", rough},
        {"mixed rbergomi scenario 3",
         MixedModel{KernelSpec::power_law(1.4, 0.1), KernelSpec::power_law(0.7, 0.1), 0.3, flat}}};
    for (auto& [name, m] : cases) {
        auto r = expansion_vs_reference(name, m, 1.0 / 12, mc);
        std::printf("%-34s %12.6f %12.6f %9.1fx\n", name.c_str(), r.expansion_s, r.reference_s, r.ratio());
    }
    return 0;
}
