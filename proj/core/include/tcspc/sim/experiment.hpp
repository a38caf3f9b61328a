#pragma once

#include <vector>

#include "tcspc/histogram.hpp"
#include "tcspc/sim/config.hpp"

namespace tcspc {

// Derived record geometry. Raw times are measured backwards from a common
// stop edge sitting record_periods() pulse spacings after the first pulse's
// clock edge, so pulse j's events land just below (record_periods - j)
// spacings and every pulse contributes one spacing-wide range to the record.
// One extra guard period above the top edge keeps the Gaussian rise of the
// first pulse inside the histogram span.
double record_span_ps(const ExperimentConfig& config);
std::uint64_t cycle_count(const ExperimentConfig& config);

double expected_decay_rate_hz(const ExperimentConfig& config);
double expected_event_rate_hz(const ExperimentConfig& config);

// Generates the detected-photon stream for the full chain: excitation,
// spontaneous emission, detection response, digitization and background.
// Per pulse, a prompt scatter event preempts a decay detection, so at most
// one photon is recorded per pulse window. Randomness is keyed per cycle;
// the stream is identical for any worker count.
std::vector<EventRecord> run_experiment(const ExperimentConfig& config, unsigned workers = 1);

// Prompt-only run (decay channel and background disabled), histogrammed and
// folded to one pulse period: the self-measured instrument response used by
// analysis.
TimeHistogram simulate_irf_measurement(const ExperimentConfig& config, unsigned workers = 1);

// Full-chain record folded to one pulse period (convenience for the CLI).
TimeHistogram fold_events(const ExperimentConfig& config, std::vector<EventRecord> const& events);

}  // namespace tcspc
