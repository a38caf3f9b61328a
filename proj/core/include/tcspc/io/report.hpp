#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tcspc/analysis/extract.hpp"
#include "tcspc/analysis/folding.hpp"
#include "tcspc/analysis/reconvolution.hpp"
#include "tcspc/histogram.hpp"
#include "tcspc/sim/config.hpp"

namespace tcspc {

// Everything needed to reproduce a simulation run byte-for-byte: the full
// resolved config plus the output file map. created_at lives here only,
// never in data files.
struct RunManifest {
    std::string code_version;
    std::string created_at;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> outputs;
    ExperimentConfig config;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

void write_result_file(const std::string& path, const LifetimeResult& result);
LifetimeResult read_result_file(const std::string& path);

// Renderers format stored operation outputs; nothing is recomputed here.
struct FitReport {
    std::string data_path;
    std::string irf_path;
    double scan_step_ps = 0.0;
    double scan_max_offset_ps = 0.0;
    double scan_end_offset_ps = 0.0;
    BackgroundEstimate background;
    ExtractionResult extraction;
    std::int64_t data_total = 0;
    double exposure_s = 0.0;
};

void render_fit_report(std::ostream& out, const FitReport& report);
void write_scan_csv(const std::string& path, const StartTimeScan& data_scan,
                    const StartTimeScan& template_scan);
void write_decay_csv(const std::string& path, const TimeHistogram& folded,
                     const DecayTemplate& model);
void write_residuals_csv(const std::string& path, const TimeHistogram& folded,
                         const DecayTemplate& model);

// Table of per-trap rows plus an optional combined line.
void render_result_table(std::ostream& out, const std::vector<LifetimeResult>& rows,
                         const std::optional<LifetimeResult>& combined, bool csv);

}  // namespace tcspc
