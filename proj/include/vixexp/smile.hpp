#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vixexp/mixed.hpp"
#include "vixexp/model.hpp"
#include "vixexp/reference.hpp"

namespace vixexp {

// Engine and grid settings for smile evaluation.
struct GridOpts {
    std::vector<double> Ts;
    std::vector<double> moneyness;
    int component = 0;  // 0 = lower sigma_P
    int N = 0;          // 0 = optimal order
    Boundary boundary = Boundary::moving;
    McConfig mc;
    int quad_nodes = 120;
};

struct SmilePoint {
    double T, k, F, iv;
    bool flag;
};

inline const std::vector<std::string> kMethods{"expansion", "hermite", "weak-approx", "reference"};

// Smile of one method at one maturity. With ks set, strikes are absolute log-strikes;
// otherwise the grid is log-moneyness against the method's own futures price.
//   expansion: closed-form IV; hermite / weak-approx: IV inverted from that price (single kernel: corrected proxy)
std::vector<SmilePoint> method_smile(const AnyModel& m, const std::string& method, double T, const GridOpts& g,
                                     const std::optional<std::vector<double>>& ks = std::nullopt);

}  // namespace vixexp
