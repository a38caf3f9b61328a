#include "tcspc/analysis/precision.hpp"

#include <cmath>
#include <stdexcept>

namespace tcspc {

double predict_statistical_precision(double count_rate_hz, double duration_s, double tau_ps,
                                     double window_ps) {
    if (!(count_rate_hz > 0.0) || !(duration_s > 0.0) || !(tau_ps > 0.0) || !(window_ps > 0.0))
        throw std::invalid_argument("predict_statistical_precision: all inputs must be positive");
    const double n = count_rate_hz * duration_s;
    return 1.0 / std::sqrt(n);
}

}  // namespace tcspc
