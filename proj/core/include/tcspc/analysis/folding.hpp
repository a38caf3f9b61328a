#pragma once

#include <span>
#include <string>

#include "tcspc/histogram.hpp"
#include "tcspc/sim/config.hpp"

namespace tcspc {

// Bin raw event times into [0, span_ps) with the given bin width. Events
// outside the span are tallied in metadata ("underflow"/"overflow"), never
// dropped silently. Truth tags are ignored.
TimeHistogram histogram_events(std::span<const EventRecord> events, double bin_width_ps,
                               double span_ps, double exposure_s = 0.0);

// Sum bins congruent modulo period/bin_width, then reverse the bin order —
// undoing the TDC's start/stop reversal so bin 0 is the earliest delay.
// Total counts are conserved exactly. Throws std::invalid_argument when the
// period is not an integer multiple of the bin width.
TimeHistogram fold_and_invert(const TimeHistogram& hist, double period_ps);

struct BackgroundEstimate {
    double level = 0.0;        // mean counts per bin in the region
    double level_error = 0.0;  // Poisson error on the mean
    std::size_t n_bins = 0;
    std::string warning;  // set when the region overlaps the peak
};

// Mean counts per bin over a peak-relative circular window
// [peak + start_offset, peak + end_offset). Requires at least 5 bins.
BackgroundEstimate background_estimate(const TimeHistogram& folded, double start_offset_ps,
                                       double end_offset_ps);

// The default background region: the last 10 bins before the prompt peak in
// the folded, inverted frame.
BackgroundEstimate background_estimate_default(const TimeHistogram& folded);

}  // namespace tcspc
