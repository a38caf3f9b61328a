#include "tcspc/analysis/reconvolution.hpp"

#include <cmath>
#include <stdexcept>

namespace tcspc {

std::vector<double> normalize_histogram(const TimeHistogram& hist) {
    const double total = static_cast<double>(hist.total());
    if (total <= 0.0)
        throw std::invalid_argument("normalize_histogram: histogram has no counts");
    std::vector<double> density;
    density.reserve(hist.counts.size());
    for (auto c : hist.counts) density.push_back(static_cast<double>(c) / total);
    return density;
}

DecayTemplate build_template(std::span<const double> irf_density, double bin_width_ps,
                             double tau_ps, double prompt_fraction, double background_per_bin,
                             double total_counts) {
    const std::size_t m = irf_density.size();
    if (m == 0) throw std::invalid_argument("build_template: empty response");
    if (!(bin_width_ps > 0.0)) throw std::invalid_argument("build_template: bin width must be > 0");
    if (!(tau_ps > 0.0)) throw std::invalid_argument("build_template: tau must be > 0");
    if (prompt_fraction < 0.0 || prompt_fraction > 1.0)
        throw std::invalid_argument("build_template: prompt_fraction must be in [0, 1]");
    double sum = 0.0;
    for (double w : irf_density) {
        if (w < 0.0) throw std::invalid_argument("build_template: negative response weight");
        sum += w;
    }
    if (std::fabs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("build_template: response is not normalized");

    // Bin-integrated wrapped exponential anchored at bin 0.
    const double x = std::exp(-bin_width_ps / tau_ps);
    const double norm = 1.0 - std::pow(x, static_cast<double>(m));
    std::vector<double> wrapped(m);
    double pk = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
        wrapped[k] = pk * (1.0 - x) / norm;
        pk *= x;
    }

    DecayTemplate tpl;
    tpl.bin_width_ps = bin_width_ps;
    tpl.values.assign(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
        double conv = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            conv += irf_density[k] * wrapped[(j + m - k) % m];
        tpl.values[j] = (1.0 - prompt_fraction) * conv + prompt_fraction * irf_density[j];
    }

    const double scale = total_counts - background_per_bin * static_cast<double>(m);
    for (auto& v : tpl.values) v = scale * v + background_per_bin;
    return tpl;
}

}  // namespace tcspc
