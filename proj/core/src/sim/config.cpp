#include "tcspc/sim/config.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace tcspc {

namespace {

constexpr double kPlanck = 6.62607015e-34;      // J s
constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

void require(bool ok, const std::string& message) {
    if (!ok) throw std::invalid_argument(message);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

double AtomicTransition::saturation_intensity_w_m2() const {
    const double lambda_m = wavelength_nm * 1e-9;
    return std::numbers::pi * kPlanck * kSpeedOfLight * linewidth_rad_per_s() /
           (3.0 * lambda_m * lambda_m * lambda_m);
}

EmpiricalIrf EmpiricalIrf::from_histogram(const TimeHistogram& hist) {
    EmpiricalIrf irf;
    irf.bin_width_ps = hist.bin_width_ps;
    irf.origin_ps = hist.origin_ps;
    const double total = static_cast<double>(hist.total());
    if (total <= 0.0) throw std::invalid_argument("EmpiricalIrf: histogram has no counts");
    irf.weights.reserve(hist.counts.size());
    for (auto c : hist.counts) irf.weights.push_back(static_cast<double>(c) / total);
    return irf;
}

const char* to_string(EventKind kind) {
    switch (kind) {
        case EventKind::decay: return "decay";
        case EventKind::prompt: return "prompt";
        case EventKind::background: return "background";
    }
    return "?";
}

void validate(const AtomicTransition& t) {
    require(std::isfinite(t.lifetime_ns) && t.lifetime_ns > 0.0,
            "AtomicTransition.lifetime_ns: must be > 0");
    require(std::isfinite(t.wavelength_nm) && t.wavelength_nm > 0.0,
            "AtomicTransition.wavelength_nm: must be > 0");
    // gamma * tau == 1 by construction; guard against representation drift.
    const double gt = t.linewidth_rad_per_s() * t.lifetime_ns * 1e-9;
    require(std::fabs(gt - 1.0) < 1e-12, "AtomicTransition: linewidth*lifetime != 1");
}

void validate(const PulseParams& p) {
    require(finite_nonneg(p.energy_pj), "PulseParams.energy_pj: must be >= 0");
    require(finite_nonneg(p.duration_ps), "PulseParams.duration_ps: must be >= 0");
    require(finite_nonneg(p.waist_um), "PulseParams.waist_um: must be >= 0");
    if (p.energy_pj > 0.0)
        require(p.waist_um > 0.0, "PulseParams.waist_um: must be > 0 when energy > 0");
}

void validate(const PulseTrain& t) {
    require(t.pulses_per_cycle >= 1, "PulseTrain.pulses_per_cycle: must be >= 1");
    require(std::isfinite(t.pulse_spacing_ps) && t.pulse_spacing_ps > 0.0,
            "PulseTrain.pulse_spacing_ps: must be > 0");
    require(finite_nonneg(t.cooling_window_ps), "PulseTrain.cooling_window_ps: must be >= 0");
    require(std::isfinite(t.cycle_rate_hz) && t.cycle_rate_hz > 0.0,
            "PulseTrain.cycle_rate_hz: must be > 0");
    const double active = t.cooling_window_ps +
                          static_cast<double>(t.pulses_per_cycle) * t.pulse_spacing_ps;
    require(active <= t.cycle_period_ps() * (1.0 + 1e-12),
            "PulseTrain: cooling + pulses*spacing exceeds the cycle period");
    require(t.record_periods() >= t.pulses_per_cycle,
            "PulseTrain: cycle period too short to record every pulse window");
}

void validate(const BeatModulation& b) {
    require(finite_nonneg(b.amplitude) && b.amplitude <= 1.0,
            "BeatModulation.amplitude: must be in [0, 1]");
    if (b.enabled && b.amplitude > 0.0)
        require(b.amplitude < 1.0, "BeatModulation.amplitude: must be < 1 (density must stay positive)");
    require(std::isfinite(b.frequency_rad_per_s), "BeatModulation.frequency_rad_per_s: not finite");
    require(std::isfinite(b.phase_rad), "BeatModulation.phase_rad: not finite");
}

void validate(const TdcSpec& t) {
    require(std::isfinite(t.bin_width_ps) && t.bin_width_ps > 0.0,
            "TdcSpec.bin_width_ps: must be > 0");
    require(finite_nonneg(t.jitter_sigma_ps), "TdcSpec.jitter_sigma_ps: must be >= 0");
    require(std::isfinite(t.scale_error_ppm), "TdcSpec.scale_error_ppm: not finite");
    require(finite_nonneg(t.inl_rms_ps), "TdcSpec.inl_rms_ps: must be >= 0");
}

void validate(const InstrumentResponse& irf) {
    if (const auto* p = std::get_if<ParametricIrf>(&irf)) {
        require(finite_nonneg(p->transit_delay_ps), "ParametricIrf.transit_delay_ps: must be >= 0");
        require(finite_nonneg(p->rise_sigma_ps), "ParametricIrf.rise_sigma_ps: must be >= 0");
        require(finite_nonneg(p->tail_ps), "ParametricIrf.tail_ps: must be >= 0");
        for (const auto& e : p->echoes) {
            require(finite_nonneg(e.delay_ps), "ParametricIrf.echo.delay_ps: must be >= 0");
            require(finite_nonneg(e.amplitude) && e.amplitude < 1.0,
                    "ParametricIrf.echo.amplitude: must be in [0, 1)");
        }
    } else {
        const auto& e = std::get<EmpiricalIrf>(irf);
        require(e.bin_width_ps > 0.0, "EmpiricalIrf.bin_width_ps: must be > 0");
        require(!e.weights.empty(), "EmpiricalIrf.weights: empty");
        double sum = 0.0;
        for (double w : e.weights) {
            require(finite_nonneg(w), "EmpiricalIrf.weights: negative or non-finite entry");
            sum += w;
        }
        require(std::fabs(sum - 1.0) <= 1e-9, "EmpiricalIrf.weights: not normalized (sum != 1)");
    }
}

void validate(const ExperimentConfig& config) {
    validate(config.transition);
    validate(config.pulse);
    validate(config.train);
    validate(config.beats);
    validate(config.tdc);
    validate(config.irf);
    require(config.detection_efficiency >= 0.0 && config.detection_efficiency <= 1.0,
            "ExperimentConfig.detection_efficiency: must be in [0, 1]");
    require(config.prompt_scatter_prob >= 0.0 && config.prompt_scatter_prob <= 1.0,
            "ExperimentConfig.prompt_scatter_prob: must be in [0, 1]");
    require(finite_nonneg(config.background_rate_hz),
            "ExperimentConfig.background_rate_hz: must be >= 0");
    require(std::isfinite(config.duration_s) && config.duration_s > 0.0,
            "ExperimentConfig.duration_s: must be > 0");
    require(std::isfinite(config.irf_measurement.delay_shift_ps),
            "IrfMeasurementModel.delay_shift_ps: not finite");
    require(std::isfinite(config.irf_measurement.rise_scale) &&
                config.irf_measurement.rise_scale > 0.0,
            "IrfMeasurementModel.rise_scale: must be > 0");
    // The fold period must be an integer number of TDC bins, or analysis
    // would have to resample.
    const double ratio = config.train.pulse_spacing_ps / config.tdc.bin_width_ps;
    require(std::fabs(ratio - std::round(ratio)) < 1e-9,
            "ExperimentConfig: pulse_spacing_ps must be an integer multiple of tdc bin_width_ps");
}

}  // namespace tcspc
