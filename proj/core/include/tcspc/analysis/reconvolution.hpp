#pragma once

#include <span>
#include <vector>

#include "tcspc/histogram.hpp"

namespace tcspc {

// Model spectrum over one fold period: real-valued expected counts per bin.
struct DecayTemplate {
    double bin_width_ps = 100.0;
    std::vector<double> values;
};

// Circular convolution (period = one fold) of the normalized response with
// the period-wrapped exponential, mixed with a prompt_fraction of the
// response itself (delta excitation sees the bare response), on a constant
// background. The result is scaled so the values sum to total_counts.
//
// irf_density must hold exactly one fold period of bins summing to 1; a
// longer response must be pre-folded. Throws std::invalid_argument on a
// length/normalization violation or prompt_fraction outside [0, 1].
DecayTemplate build_template(std::span<const double> irf_density, double bin_width_ps,
                             double tau_ps, double prompt_fraction, double background_per_bin,
                             double total_counts);

// Normalized density view of a folded response histogram.
std::vector<double> normalize_histogram(const TimeHistogram& hist);

}  // namespace tcspc
