#include "tcspc/analysis/scan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcspc {

double StartTimeScan::max_deviation_sigma() const {
    const ScanPoint* reference = nullptr;
    for (auto it = points.rbegin(); it != points.rend(); ++it) {
        if (it->fit.converged && it->fit.tau_stat_ps > 0.0) {
            reference = &*it;
            break;
        }
    }
    if (!reference) return 0.0;
    double worst = 0.0;
    for (const auto& p : points) {
        if (!p.fit.converged || &p == reference) continue;
        const double sigma = std::sqrt(p.fit.tau_stat_ps * p.fit.tau_stat_ps +
                                       reference->fit.tau_stat_ps * reference->fit.tau_stat_ps);
        if (sigma <= 0.0) continue;
        worst = std::max(worst, std::fabs(p.fit.tau_ps - reference->fit.tau_ps) / sigma);
    }
    return worst;
}

double StartTimeScan::relative_variation() const {
    // Variation among the stepped-out points. The zeroth window begins on
    // the response peak itself and measures the instrument more than the
    // decay, and shrinking windows at the largest offsets are noise, so the
    // quoted variation keeps points past the first step whose error is
    // within 3x the best.
    double sigma_min = 0.0;
    for (const auto& p : points)
        if (p.fit.converged && p.fit.tau_stat_ps > 0.0)
            sigma_min = sigma_min == 0.0 ? p.fit.tau_stat_ps
                                         : std::min(sigma_min, p.fit.tau_stat_ps);
    std::vector<double> taus;
    for (const auto& p : points)
        if (p.fit.converged && p.start_offset_ps > 0.0 && p.fit.tau_stat_ps <= 3.0 * sigma_min)
            taus.push_back(p.fit.tau_ps);
    if (taus.size() < 2) return 0.0;
    auto sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    const double median = sorted[sorted.size() / 2];
    return (sorted.back() - sorted.front()) / median;
}

StartTimeScan scan_start_time_values(std::span<const double> series, double bin_width_ps,
                                     const ScanConfig& config) {
    if (config.step_ps < bin_width_ps)
        throw std::invalid_argument("scan_start_time: step must be at least one bin width");
    const double period = bin_width_ps * static_cast<double>(series.size());
    const double end = config.resolved_end_ps(period);

    StartTimeScan scan;
    for (double start = 0.0; start <= config.max_offset_ps + 1e-9; start += config.step_ps) {
        if (start >= end) break;
        ScanPoint point;
        point.start_offset_ps = start;
        point.fit = fit_decay_values(series, bin_width_ps, FitWindow{start, end}, config.model,
                                     config.fit_background, config.fixed_background,
                                     config.hints);
        scan.points.push_back(std::move(point));
    }
    return scan;
}

StartTimeScan scan_start_time(const TimeHistogram& folded, const ScanConfig& config) {
    std::vector<double> series(folded.counts.begin(), folded.counts.end());
    return scan_start_time_values(series, folded.bin_width_ps, config);
}

}  // namespace tcspc
