#include "tcspc/sim/instrument.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace tcspc {

std::vector<double> generate_inl_pattern(const TdcSpec& tdc, std::size_t n_bins) {
    validate(tdc);
    if (n_bins < 1) throw std::invalid_argument("generate_inl_pattern: n_bins must be >= 1");
    std::vector<double> pattern(n_bins, 0.0);
    if (tdc.inl_rms_ps == 0.0 || n_bins < 2) return pattern;

    // Low harmonics of the record length only, so the wander is slow against
    // the bin width (integral nonlinearity, not differential).
    RandomStream rng(tdc.inl_seed, 0x494E4CULL ^ static_cast<std::uint64_t>(n_bins));
    const std::size_t n_harmonics = std::clamp<std::size_t>(n_bins / 6, 1, 24);
    for (std::size_t k = 1; k <= n_harmonics; ++k) {
        const double amplitude = rng.normal(0.0, 1.0);
        const double phase = 2.0 * std::numbers::pi * rng.uniform();
        const double freq = 2.0 * std::numbers::pi * static_cast<double>(k) /
                            static_cast<double>(n_bins);
        for (std::size_t i = 0; i < n_bins; ++i)
            pattern[i] += amplitude * std::cos(freq * static_cast<double>(i) + phase);
    }

    double mean = 0.0;
    for (double v : pattern) mean += v;
    mean /= static_cast<double>(n_bins);
    double ms = 0.0;
    for (double& v : pattern) {
        v -= mean;
        ms += v * v;
    }
    ms /= static_cast<double>(n_bins);
    if (ms <= 0.0) return std::vector<double>(n_bins, 0.0);
    const double scale = tdc.inl_rms_ps / std::sqrt(ms);
    for (double& v : pattern) v *= scale;
    return pattern;
}

double digitize(double true_time_ps, const TdcSpec& tdc, std::span<const double> inl,
                RandomStream& rng) {
    double t = true_time_ps;
    if (tdc.jitter_sigma_ps > 0.0) t = rng.normal(t, tdc.jitter_sigma_ps);
    t *= 1.0 + tdc.scale_error_ppm * 1e-6;
    if (!inl.empty()) {
        const auto idx = static_cast<std::ptrdiff_t>(std::floor(t / tdc.bin_width_ps));
        const auto clamped = std::clamp<std::ptrdiff_t>(idx, 0,
                                                        static_cast<std::ptrdiff_t>(inl.size()) - 1);
        t += inl[static_cast<std::size_t>(clamped)];
    }
    return std::floor(t / tdc.bin_width_ps) * tdc.bin_width_ps;
}

IrfSampler::IrfSampler(const InstrumentResponse& irf) {
    validate(irf);
    if (const auto* p = std::get_if<ParametricIrf>(&irf)) {
        transit_delay_ps_ = p->transit_delay_ps;
        rise_sigma_ps_ = p->rise_sigma_ps;
        tail_ps_ = p->tail_ps;
        double cum = 1.0;  // main component weight
        for (const auto& e : p->echoes) {
            if (e.amplitude <= 0.0) continue;
            cum += e.amplitude;
            echo_delay_ps_.push_back(e.delay_ps);
            echo_cumulative_.push_back(cum);
        }
        total_weight_ = cum;
        delta_ = transit_delay_ps_ == 0.0 && rise_sigma_ps_ == 0.0 && tail_ps_ == 0.0 &&
                 echo_delay_ps_.empty();
    } else {
        const auto& e = std::get<EmpiricalIrf>(irf);
        empirical_ = true;
        bin_width_ps_ = e.bin_width_ps;
        origin_ps_ = e.origin_ps;
        cumulative_.reserve(e.weights.size());
        double cum = 0.0;
        for (double w : e.weights) {
            cum += w;
            cumulative_.push_back(cum);
        }
        std::size_t occupied = 0;
        for (double w : e.weights) occupied += w > 0.0;
        delta_ = occupied == 1 && e.origin_ps == 0.0 && e.weights.front() > 0.0;
    }
}

double IrfSampler::sample_delay_ps(RandomStream& rng) const {
    if (empirical_) {
        const double u = rng.uniform() * cumulative_.back();
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto bin = static_cast<std::size_t>(it - cumulative_.begin());
        return origin_ps_ + bin_width_ps_ * static_cast<double>(
                                std::min(bin, cumulative_.size() - 1));
    }
    double delay = transit_delay_ps_;
    if (rise_sigma_ps_ > 0.0) delay += rng.normal(0.0, rise_sigma_ps_);
    if (tail_ps_ > 0.0) delay += rng.exponential(tail_ps_);
    if (!echo_delay_ps_.empty()) {
        const double u = rng.uniform() * total_weight_;
        if (u > 1.0) {
            const auto it = std::upper_bound(echo_cumulative_.begin(), echo_cumulative_.end(), u);
            const auto k = static_cast<std::size_t>(it - echo_cumulative_.begin());
            delay += echo_delay_ps_[std::min(k, echo_delay_ps_.size() - 1)];
        }
    }
    return delay;
}

double apply_instrument_response(double emission_time_ps, const InstrumentResponse& irf,
                                 RandomStream& rng) {
    return emission_time_ps + IrfSampler(irf).sample_delay_ps(rng);
}

}  // namespace tcspc
