#pragma once

#include <span>
#include <vector>

#include "tcspc/analysis/decay_fit.hpp"
#include "tcspc/histogram.hpp"

namespace tcspc {

struct ScanConfig {
    double step_ps = 500.0;
    double max_offset_ps = 6000.0;
    // End of every fit window, from the peak. 0 selects the default of one
    // fold period minus 2.5 ns: the response tail delays the observed peak
    // by about 1 ns, so the rising edge re-enters the circular frame well
    // before the peak and must stay out of the window.
    double end_offset_ps = 0.0;
    DecayModel model = DecayModel::wrapped_exponential;
    bool fit_background = true;
    double fixed_background = 0.0;
    FitHints hints;

    double resolved_end_ps(double period_ps) const {
        return end_offset_ps > 0.0 ? end_offset_ps : period_ps - 2500.0;
    }
};

struct ScanPoint {
    double start_offset_ps = 0.0;
    FitResult fit;
};

struct StartTimeScan {
    std::vector<ScanPoint> points;

    // Largest |tau(s) - tau(last point)| in units of the combined error.
    double max_deviation_sigma() const;
    // (max tau - min tau) / median tau over converged points.
    double relative_variation() const;
};

// Repeated fit_decay with the window start stepped out from the peak:
// start = 0, step, 2 step, ... <= max_offset, end fixed. Per-point fit
// failures propagate as non-converged entries. step must be at least one
// bin wide.
StartTimeScan scan_start_time(const TimeHistogram& folded, const ScanConfig& config);
StartTimeScan scan_start_time_values(std::span<const double> series, double bin_width_ps,
                                     const ScanConfig& config);

}  // namespace tcspc
