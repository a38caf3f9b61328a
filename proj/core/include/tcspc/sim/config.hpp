#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tcspc/histogram.hpp"

namespace tcspc {

// Two-level transition. linewidth is gamma = 1/tau (angular, rad/s); the
// saturation intensity follows the standard two-level definition
// I_s = pi h c gamma / (3 lambda^3).
struct AtomicTransition {
    std::string label = "P1/2";  // "P1/2" or "P3/2" for the built-in presets
    double lifetime_ns = 3.148;
    double wavelength_nm = 226.5;

    double lifetime_ps() const { return lifetime_ns * 1e3; }
    double linewidth_rad_per_s() const { return 1e9 / lifetime_ns; }
    double saturation_intensity_w_m2() const;
};

struct PulseParams {
    double energy_pj = 10.0;
    double duration_ps = 1.0;  // t_uv
    double waist_um = 6.0;     // w_o
};

struct PulseTrain {
    std::uint32_t pulses_per_cycle = 15;
    double pulse_spacing_ps = 12400.0;
    double cooling_window_ps = 500e3;
    double cycle_rate_hz = 1e6;

    double cycle_period_ps() const { return 1e12 / cycle_rate_hz; }
    // Clock periods covered by one cycle's record; the common stop sits this
    // many pulse spacings after the first pulse's clock edge.
    std::uint32_t record_periods() const {
        return static_cast<std::uint32_t>(cycle_period_ps() / pulse_spacing_ps);
    }
};

// (1 + A cos(w t + phi)) modulation of the exponential emission density.
// amplitude = 0 reproduces the pure exponential exactly.
struct BeatModulation {
    bool enabled = false;
    double amplitude = 0.0;
    double frequency_rad_per_s = 0.0;
    double phase_rad = 0.0;
};

struct TdcSpec {
    double bin_width_ps = 100.0;
    double jitter_sigma_ps = 145.0;
    double scale_error_ppm = 20.0;
    double inl_rms_ps = 20.0;
    std::uint64_t inl_seed = 1;
};

// Main peak: Gaussian rise convolved with an exponential tail (PMT response);
// echoes are scaled copies at fixed delays (electronic ringing).
struct ParametricIrf {
    double transit_delay_ps = 0.0;  // fixed optical/cable delay
    double rise_sigma_ps = 150.0;
    double tail_ps = 500.0;
    struct Echo {
        double delay_ps = 0.0;
        double amplitude = 0.0;  // relative to the main peak
    };
    std::vector<Echo> echoes;
};

// Measured response shape: nonnegative per-bin weights summing to 1.
struct EmpiricalIrf {
    double bin_width_ps = 100.0;
    double origin_ps = 0.0;
    std::vector<double> weights;
    std::string source_path;  // file the shape was loaded from, when any

    static EmpiricalIrf from_histogram(const TimeHistogram& hist);
};

using InstrumentResponse = std::variant<ParametricIrf, EmpiricalIrf>;

// Fidelity of the scatter-based response measurement relative to the
// in-situ single-photon response: the measurement geometry differs from the
// ion's optical path, so the measured shape may sit at a slightly different
// delay and width.
struct IrfMeasurementModel {
    double delay_shift_ps = 0.0;
    double rise_scale = 1.0;
};

struct ExperimentConfig {
    AtomicTransition transition;
    PulseParams pulse;
    PulseTrain train;
    InstrumentResponse irf = ParametricIrf{};
    TdcSpec tdc;
    IrfMeasurementModel irf_measurement;
    BeatModulation beats;
    double detection_efficiency = 5.82132539e-4;  // collection x quantum efficiency
    double prompt_scatter_prob = 1e-5;            // per pulse, scattered laser light
    double background_rate_hz = 50.0;             // uncorrelated dark/stray counts
    double duration_s = 60.0;
    std::uint64_t seed = 1;
    std::string trap_label = "quadrupole";
};

enum class EventKind : std::uint8_t { decay, prompt, background };

const char* to_string(EventKind kind);

// One detected photon. raw_time_ps is the TDC output in the time-reversed
// frame (photon starts the converter, the laser reference clock stops it),
// already quantised to a bin edge. Truth tags support validation only and
// are never consumed by analysis operations.
struct EventRecord {
    std::uint64_t cycle_index = 0;
    std::uint32_t pulse_index = 0;
    double raw_time_ps = 0.0;
    EventKind kind = EventKind::decay;
};

// Throw std::invalid_argument naming the offending field when an invariant
// is violated.
void validate(const AtomicTransition& t);
void validate(const PulseParams& p);
void validate(const PulseTrain& t);
void validate(const BeatModulation& b);
void validate(const TdcSpec& t);
void validate(const InstrumentResponse& irf);
void validate(const ExperimentConfig& config);

}  // namespace tcspc
