#include "tcspc/sim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <tuple>

#include "tcspc/analysis/folding.hpp"
#include "tcspc/sim/instrument.hpp"
#include "tcspc/sim/physics.hpp"

namespace tcspc {

double record_span_ps(const ExperimentConfig& config) {
    return (static_cast<double>(config.train.record_periods()) + 1.0) *
           config.train.pulse_spacing_ps;
}

std::uint64_t cycle_count(const ExperimentConfig& config) {
    return static_cast<std::uint64_t>(config.duration_s * config.train.cycle_rate_hz + 0.5);
}

double expected_decay_rate_hz(const ExperimentConfig& config) {
    const double p_exc = excitation_probability(config.pulse, config.transition);
    const double p_decay = (1.0 - config.prompt_scatter_prob) * p_exc * config.detection_efficiency;
    return config.train.cycle_rate_hz * config.train.pulses_per_cycle * p_decay;
}

double expected_event_rate_hz(const ExperimentConfig& config) {
    const double p_exc = excitation_probability(config.pulse, config.transition);
    const double p_any = config.prompt_scatter_prob +
                         (1.0 - config.prompt_scatter_prob) * p_exc * config.detection_efficiency;
    return config.train.cycle_rate_hz * config.train.pulses_per_cycle * p_any +
           config.background_rate_hz;
}

namespace {

struct CycleContext {
    const ExperimentConfig* config;
    const IrfSampler* irf;
    std::span<const double> inl;
    double spacing_ps;
    std::uint32_t pulses;
    std::uint32_t record_periods;
    double bg_window_ps;   // background lands uniformly in [0, bg_window)
    double p_any;          // per-pulse probability of any detected photon
    double p_prompt_given_any;
    double log1m_p_any;
    double p_none_cycle;   // (1 - p_any)^pulses
    double bg_mean;        // expected background counts per cycle
    double bg_poisson_limit;
};

void generate_cycle(const CycleContext& ctx, std::uint64_t cycle,
                    std::vector<EventRecord>& out) {
    const auto& config = *ctx.config;
    RandomStream rng(config.seed, cycle);
    const std::size_t first = out.size();

    if (ctx.p_any > 0.0) {
        std::uint32_t j = 0;
        double u = rng.uniform();
        // Fast path: no detection anywhere in this pulse train.
        if (u < 1.0 - ctx.p_none_cycle) {
            while (j < ctx.pulses) {
                const double skip = std::floor(std::log1p(-u) / ctx.log1m_p_any);
                if (skip >= static_cast<double>(ctx.pulses - j)) break;
                j += static_cast<std::uint32_t>(skip);

                const bool prompt = rng.uniform() < ctx.p_prompt_given_any;
                double delay = 0.0;
                if (!prompt) delay = sample_emission_delay(config.transition, config.beats, rng);
                delay += ctx.irf->sample_delay_ps(rng);

                const double raw =
                    static_cast<double>(ctx.record_periods - j) * ctx.spacing_ps - delay;
                EventRecord ev;
                ev.cycle_index = cycle;
                ev.pulse_index = j;
                ev.raw_time_ps = digitize(raw, config.tdc, ctx.inl, rng);
                ev.kind = prompt ? EventKind::prompt : EventKind::decay;
                out.push_back(ev);

                if (++j >= ctx.pulses) break;
                u = rng.uniform();
            }
        }
    }

    if (ctx.bg_mean > 0.0) {
        // Knuth with a precomputed limit; bg_mean is tiny per cycle.
        std::uint32_t n_bg = 0;
        double p = rng.uniform();
        while (p > ctx.bg_poisson_limit) {
            p *= rng.uniform();
            ++n_bg;
        }
        for (std::uint32_t b = 0; b < n_bg; ++b) {
            const double t = rng.uniform() * ctx.bg_window_ps;
            const auto window = static_cast<std::int64_t>(ctx.record_periods) - 1 -
                                static_cast<std::int64_t>(t / ctx.spacing_ps);
            EventRecord ev;
            ev.cycle_index = cycle;
            ev.pulse_index = static_cast<std::uint32_t>(std::clamp<std::int64_t>(
                window, 0, static_cast<std::int64_t>(ctx.pulses) - 1));
            ev.raw_time_ps = digitize(t, config.tdc, ctx.inl, rng);
            ev.kind = EventKind::background;
            out.push_back(ev);
        }
    }

    std::sort(out.begin() + static_cast<std::ptrdiff_t>(first), out.end(),
              [](const EventRecord& a, const EventRecord& b) {
                  return std::tie(a.pulse_index, a.raw_time_ps, a.kind) <
                         std::tie(b.pulse_index, b.raw_time_ps, b.kind);
              });
}

}  // namespace

std::vector<EventRecord> run_experiment(const ExperimentConfig& config, unsigned workers) {
    validate(config);

    const IrfSampler irf(config.irf);
    const auto n_inl_bins =
        static_cast<std::size_t>(std::ceil(record_span_ps(config) / config.tdc.bin_width_ps));
    const std::vector<double> inl = generate_inl_pattern(config.tdc, n_inl_bins);

    CycleContext ctx;
    ctx.config = &config;
    ctx.irf = &irf;
    ctx.inl = inl;
    ctx.spacing_ps = config.train.pulse_spacing_ps;
    ctx.pulses = config.train.pulses_per_cycle;
    ctx.record_periods = config.train.record_periods();
    ctx.bg_window_ps = static_cast<double>(ctx.record_periods) * ctx.spacing_ps;
    const double p_exc = excitation_probability(config.pulse, config.transition);
    const double p_decay = p_exc * config.detection_efficiency;
    ctx.p_any = config.prompt_scatter_prob + (1.0 - config.prompt_scatter_prob) * p_decay;
    ctx.p_prompt_given_any = ctx.p_any > 0.0 ? config.prompt_scatter_prob / ctx.p_any : 0.0;
    ctx.log1m_p_any = std::log1p(-ctx.p_any);
    ctx.p_none_cycle = std::pow(1.0 - ctx.p_any, static_cast<double>(ctx.pulses));
    ctx.bg_mean = config.background_rate_hz * config.train.cycle_period_ps() * 1e-12;
    ctx.bg_poisson_limit = std::exp(-ctx.bg_mean);

    const std::uint64_t n_cycles = cycle_count(config);
    if (workers < 1) workers = 1;
    if (workers == 1 || n_cycles < 4 * workers) {
        std::vector<EventRecord> events;
        for (std::uint64_t c = 0; c < n_cycles; ++c) generate_cycle(ctx, c, events);
        return events;
    }

    std::vector<std::vector<EventRecord>> parts(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::uint64_t chunk = (n_cycles + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::uint64_t begin = w * chunk;
        const std::uint64_t end = std::min(n_cycles, begin + chunk);
        pool.emplace_back([&, w, begin, end] {
            for (std::uint64_t c = begin; c < end; ++c) generate_cycle(ctx, c, parts[w]);
        });
    }
    for (auto& t : pool) t.join();

    std::vector<EventRecord> events;
    std::size_t total = 0;
    for (const auto& p : parts) total += p.size();
    events.reserve(total);
    for (auto& p : parts) events.insert(events.end(), p.begin(), p.end());
    return events;
}

TimeHistogram simulate_irf_measurement(const ExperimentConfig& config, unsigned workers) {
    ExperimentConfig prompt_only = config;
    prompt_only.detection_efficiency = 0.0;
    prompt_only.background_rate_hz = 0.0;
    // Scattering off an electrode is not quite the ion's optical path: the
    // measured shape sits at a slightly different delay and width.
    if (auto* irf = std::get_if<ParametricIrf>(&prompt_only.irf)) {
        irf->transit_delay_ps += config.irf_measurement.delay_shift_ps;
        irf->rise_sigma_ps *= config.irf_measurement.rise_scale;
    } else {
        auto& empirical = std::get<EmpiricalIrf>(prompt_only.irf);
        empirical.origin_ps += config.irf_measurement.delay_shift_ps;
    }
    const auto events = run_experiment(prompt_only, workers);
    auto hist = histogram_events(events, config.tdc.bin_width_ps, record_span_ps(config),
                                 config.duration_s);
    auto folded = fold_and_invert(hist, config.train.pulse_spacing_ps);
    folded.metadata["label"] = "irf_measurement";
    return folded;
}

TimeHistogram fold_events(const ExperimentConfig& config, std::vector<EventRecord> const& events) {
    auto hist = histogram_events(events, config.tdc.bin_width_ps, record_span_ps(config),
                                 config.duration_s);
    return fold_and_invert(hist, config.train.pulse_spacing_ps);
}

}  // namespace tcspc
