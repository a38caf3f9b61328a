#include "tcspc/analysis/folding.hpp"

#include <cmath>
#include <stdexcept>

namespace tcspc {

TimeHistogram histogram_events(std::span<const EventRecord> events, double bin_width_ps,
                               double span_ps, double exposure_s) {
    if (!(bin_width_ps > 0.0))
        throw std::invalid_argument("histogram_events: bin_width_ps must be > 0");
    if (!(span_ps > 0.0)) throw std::invalid_argument("histogram_events: span_ps must be > 0");

    TimeHistogram hist;
    hist.bin_width_ps = bin_width_ps;
    hist.origin_ps = 0.0;
    hist.exposure_s = exposure_s;
    hist.counts.assign(static_cast<std::size_t>(std::ceil(span_ps / bin_width_ps - 1e-9)), 0);

    std::int64_t underflow = 0;
    std::int64_t overflow = 0;
    const auto n = static_cast<std::ptrdiff_t>(hist.counts.size());
    for (const auto& ev : events) {
        // Digitized times sit on bin edges; the epsilon keeps them there.
        const auto idx =
            static_cast<std::ptrdiff_t>(std::floor(ev.raw_time_ps / bin_width_ps + 1e-9));
        if (idx < 0) {
            ++underflow;
        } else if (idx >= n) {
            ++overflow;
        } else {
            ++hist.counts[static_cast<std::size_t>(idx)];
        }
    }
    if (underflow > 0) hist.add_metadata_count("underflow", underflow);
    if (overflow > 0) hist.add_metadata_count("overflow", overflow);
    return hist;
}

TimeHistogram fold_and_invert(const TimeHistogram& hist, double period_ps) {
    if (!(period_ps > 0.0)) throw std::invalid_argument("fold_and_invert: period must be > 0");
    const double ratio = period_ps / hist.bin_width_ps;
    if (std::fabs(ratio - std::round(ratio)) > 1e-9)
        throw std::invalid_argument(
            "fold_and_invert: period is not an integer multiple of the bin width");
    const auto m = static_cast<std::size_t>(std::llround(ratio));
    if (m == 0) throw std::invalid_argument("fold_and_invert: period shorter than one bin");

    TimeHistogram out;
    out.bin_width_ps = hist.bin_width_ps;
    out.origin_ps = 0.0;
    out.exposure_s = hist.exposure_s;
    out.metadata = hist.metadata;
    out.metadata["fold_period_ps"] = std::to_string(period_ps);
    out.counts.assign(m, 0);
    for (std::size_t i = 0; i < hist.counts.size(); ++i) {
        const std::size_t j = i % m;
        out.counts[m - 1 - j] += hist.counts[i];
    }
    return out;
}

BackgroundEstimate background_estimate(const TimeHistogram& folded, double start_offset_ps,
                                       double end_offset_ps) {
    const std::size_t m = folded.n_bins();
    const double width = folded.bin_width_ps;
    const auto ks = static_cast<std::int64_t>(std::llround(start_offset_ps / width));
    const auto ke = static_cast<std::int64_t>(std::llround(end_offset_ps / width));
    if (ke - ks < 5)
        throw std::invalid_argument("background_estimate: region must contain at least 5 bins");
    if (m == 0) throw std::invalid_argument("background_estimate: empty histogram");

    const std::size_t peak = folded.peak_bin();
    BackgroundEstimate est;
    est.n_bins = static_cast<std::size_t>(ke - ks);
    std::int64_t sum = 0;
    bool touches_peak = false;
    for (std::int64_t k = ks; k < ke; ++k) {
        const std::size_t idx =
            static_cast<std::size_t>(((static_cast<std::int64_t>(peak) + k) % static_cast<std::int64_t>(m) +
                                      static_cast<std::int64_t>(m)) %
                                     static_cast<std::int64_t>(m));
        sum += folded.counts[idx];
        // Peak neighbourhood: the peak bin and the two bins after it.
        const std::int64_t rel = (static_cast<std::int64_t>(idx) - static_cast<std::int64_t>(peak) +
                                  static_cast<std::int64_t>(m)) %
                                 static_cast<std::int64_t>(m);
        if (rel <= 2) touches_peak = true;
    }
    const auto n = static_cast<double>(est.n_bins);
    est.level = static_cast<double>(sum) / n;
    est.level_error = std::sqrt(static_cast<double>(sum)) / n;
    if (touches_peak)
        est.warning = "background region overlaps the prompt peak; estimate is decay-contaminated";
    return est;
}

BackgroundEstimate background_estimate_default(const TimeHistogram& folded) {
    const double period = folded.span_ps();
    return background_estimate(folded, period - 10.0 * folded.bin_width_ps, period);
}

}  // namespace tcspc
