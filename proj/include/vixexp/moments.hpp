#pragma once

#include "vixexp/model.hpp"
#include "vixexp/parallel.hpp"

namespace vixexp {

struct QuadSpec {
    int n_t = 120;
    int n_u = 120;
};

// Window integrals of the unit-vol kernel K0 (vol = 1). With <f> the xi-weighted u-average,
// I2(u) = int_0^T K0^u(t)^2 dt, kbar(t) = <K0^.(t)>, M(u) = int_0^T kbar(t) K0^u(t) dt:
//   m0 = <I2>, s0sq = int kbar^2, a2 = <(I2-m0)^2>, ac = <(I2-m0)(M-<M>)>, c2 = <(M-<M>)^2>.
// Every proxy quantity of a kernel with vol v follows by scaling (v^2, v^4).
struct UnitMoments {
    double L = 0.0;  // ln E[VIX^2]
    double m0 = 0.0;
    double s0sq = 0.0;
    double a2 = 0.0;
    double ac = 0.0;
    double c2 = 0.0;
};

UnitMoments unit_moments(KernelKind kind, double decay, const ForwardVarianceCurve& curve, const VixContract& c,
                         const QuadSpec& q = {}, Exec exec = Exec::parallel);

}  // namespace vixexp
