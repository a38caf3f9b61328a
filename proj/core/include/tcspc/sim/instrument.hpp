#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcspc/sim/config.hpp"
#include "tcspc/sim/rng.hpp"

namespace tcspc {

// Smooth (band-limited) integral-nonlinearity offsets, one per TDC bin:
// zero mean, rms equal to tdc.inl_rms_ps, and a pure function of
// (tdc.inl_seed, n_bins).
std::vector<double> generate_inl_pattern(const TdcSpec& tdc, std::size_t n_bins);

// TDC conversion: Gaussian jitter, timebase scale error, bin-dependent INL
// offset, then floor quantization. Returns the left edge of the output bin.
double digitize(double true_time_ps, const TdcSpec& tdc, std::span<const double> inl,
                RandomStream& rng);

// Draws detection-chain delays from an InstrumentResponse. The parametric
// form samples a Gaussian rise plus exponential tail, promoted to an echo
// replica with probability amplitude/(1 + sum of amplitudes). The empirical
// form draws a bin with probability equal to its weight (point mass at the
// bin start).
class IrfSampler {
public:
    explicit IrfSampler(const InstrumentResponse& irf);

    double sample_delay_ps(RandomStream& rng) const;

    // True when every draw returns exactly zero (identity response).
    bool is_delta() const { return delta_; }

private:
    bool empirical_ = false;
    bool delta_ = false;
    // parametric
    double transit_delay_ps_ = 0.0;
    double rise_sigma_ps_ = 0.0;
    double tail_ps_ = 0.0;
    std::vector<double> echo_delay_ps_;
    std::vector<double> echo_cumulative_;  // cumulative weights over 1 + sum(amp)
    double total_weight_ = 1.0;
    // empirical
    double bin_width_ps_ = 0.0;
    double origin_ps_ = 0.0;
    std::vector<double> cumulative_;
};

// One-shot convenience over IrfSampler.
double apply_instrument_response(double emission_time_ps, const InstrumentResponse& irf,
                                 RandomStream& rng);

}  // namespace tcspc
