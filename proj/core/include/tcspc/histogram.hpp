#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace tcspc {

// Binned photon-arrival counts. All times are picoseconds; exposure is the
// live data-taking duration in seconds. Events falling outside the binned
// span are tallied in metadata ("underflow"/"overflow"), never dropped
// silently.
struct TimeHistogram {
    double bin_width_ps = 100.0;
    double origin_ps = 0.0;
    std::vector<std::int64_t> counts;
    double exposure_s = 0.0;
    std::map<std::string, std::string> metadata;

    std::size_t n_bins() const { return counts.size(); }
    double span_ps() const { return bin_width_ps * static_cast<double>(counts.size()); }
    double bin_start_ps(std::size_t i) const {
        return origin_ps + bin_width_ps * static_cast<double>(i);
    }

    std::int64_t total() const;

    // Start bin of the steepest three-bin rise (circular argmax of
    // counts[i]+counts[i+1]+counts[i+2]). A single-bin argmax is unstable at
    // the top of a decay curve whose left neighbour is the wrapped tail.
    std::size_t peak_bin() const;

    std::int64_t metadata_count(const std::string& key) const;
    void add_metadata_count(const std::string& key, std::int64_t n);
};

}  // namespace tcspc
