#pragma once

#include <string>

#include "tcspc/histogram.hpp"

namespace tcspc {

// Plain-text format: '#' header lines carrying bin_width_ps, origin_ps,
// exposure_s and meta.* entries, then one "bin_start_ps,count" row per bin.
// Integer counts round-trip bit-exactly; malformed rows are rejected with
// their line number.
std::string histogram_to_string(const TimeHistogram& hist);
TimeHistogram histogram_from_string(const std::string& text, const std::string& context);

void write_histogram(const std::string& path, const TimeHistogram& hist);
TimeHistogram read_histogram(const std::string& path);

// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

}  // namespace tcspc
