#pragma once

#include <algorithm>
#include <chrono>
#include <string>
#include <vector>

#include "vixexp/reference.hpp"
#include "vixexp/smile.hpp"

namespace vixexp::bench {

// Wall time of one call, averaged over a batch that runs for at least min_batch seconds.
template <class F>
double batch_seconds(F&& f, double min_batch) {
    using clock = std::chrono::steady_clock;
    int n = 0;
    auto t0 = clock::now();
    double el = 0.0;
    do {
        f();
        ++n;
        el = std::chrono::duration<double>(clock::now() - t0).count();
    } while (el < min_batch);
    return el / n;
}

// Median over batches.
template <class F>
double seconds_per_call(F&& f, double min_batch = 0.05, int batches = 5) {
    std::vector<double> t;
    for (int b = 0; b < batches; ++b) t.push_back(batch_seconds(f, min_batch));
    std::nth_element(t.begin(), t.begin() + batches / 2, t.end());
    return t[batches / 2];
}

struct SpeedRow {
    std::string name;
    double expansion_s, reference_s;
    double ratio() const { return reference_s / expansion_s; }
};

inline std::vector<double> smile_grid() {
    std::vector<double> g;
    for (int i = 0; i < 10; ++i) g.push_back(-0.1 + 0.5 * i / 9.0);
    return g;
}

// One 10-strike smile at maturity T: closed-form expansion (moments included) against the reference engine.
// The two sides are timed in alternating rounds and each keeps its fastest round, so load spikes on a shared
// machine do not land on one side only.
inline SpeedRow expansion_vs_reference(const std::string& name, const AnyModel& m, double T, const McConfig& mc,
                                       int rounds = 5) {
    GridOpts g;
    g.moneyness = smile_grid();
    g.mc = mc;
    double te = 1e300, tr = 1e300;
    for (int r = 0; r < rounds; ++r) {
        te = std::min(te, batch_seconds([&] { method_smile(m, "expansion", T, g); }, 0.02));
        tr = std::min(tr, batch_seconds([&] { method_smile(m, "reference", T, g); }, 0.0));
    }
    return {name, te, tr};
}

}  // namespace vixexp::bench
