#pragma once

#include <string>
#include <vector>

#include "tcspc/analysis/scan.hpp"
#include "tcspc/histogram.hpp"

namespace tcspc {

// A trap-level or final lifetime with separated error components.
// final_error_ps is computed from the named combine rule ("quadrature").
struct LifetimeResult {
    std::string trap_label;
    double tau_ps = 0.0;
    double stat_error_ps = 0.0;
    double sys_error_ps = 0.0;
    double final_error_ps = 0.0;
    std::string combine_rule = "quadrature";
};

struct ExtractOptions {
    ScanConfig scan;
    double prompt_fraction_max = 0.95;
    double match_chi2_ndf_limit = 10.0;  // extraction fails above this
};

struct ExtractionResult {
    LifetimeResult result;
    StartTimeScan data_scan;
    StartTimeScan template_scan;  // at the matched (tau, prompt_fraction)
    double prompt_fraction = 0.0;
    double match_chi2_ndf = 0.0;
    double scan_residual_rms_ps = 0.0;
    int n_matched_points = 0;
    bool success = false;
    std::string diagnostics;
};

// Matches the convolved-response model family (wrapped exponential circularly
// convolved with the measured response, plus a delta prompt component and a
// flat background) against the folded data by Poisson maximum likelihood;
// the matching tau is the lifetime and the observed information gives its
// statistical error. The matched template is then scanned in the same manner
// as the data; the residual spread between the two start-time-scan curves,
// measured against the data's per-point errors and converted through the
// fit's tau sensitivity, is reported as the systematic error.
ExtractionResult extract_lifetime(const TimeHistogram& data_folded,
                                  const TimeHistogram& irf_folded, const ExtractOptions& options);

// Inverse-variance weighted mean over statistical errors. With common_sys
// the systematic error passes through unreduced; otherwise systematics
// combine in weighted quadrature. Throws std::invalid_argument on an empty
// list or a non-positive statistical error.
LifetimeResult combine_measurements(const std::vector<LifetimeResult>& results, bool common_sys);

}  // namespace tcspc
