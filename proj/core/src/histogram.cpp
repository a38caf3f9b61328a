#include "tcspc/histogram.hpp"

#include <numeric>

namespace tcspc {

std::int64_t TimeHistogram::total() const {
    return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::size_t TimeHistogram::peak_bin() const {
    const std::size_t n = counts.size();
    if (n < 3) return 0;
    std::size_t best = 0;
    std::int64_t best_sum = -1;
    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t s = counts[i] + counts[(i + 1) % n] + counts[(i + 2) % n];
        if (s > best_sum) {
            best_sum = s;
            best = i;
        }
    }
    return best;
}

std::int64_t TimeHistogram::metadata_count(const std::string& key) const {
    auto it = metadata.find(key);
    if (it == metadata.end()) return 0;
    return std::stoll(it->second);
}

void TimeHistogram::add_metadata_count(const std::string& key, std::int64_t n) {
    metadata[key] = std::to_string(metadata_count(key) + n);
}

}  // namespace tcspc
