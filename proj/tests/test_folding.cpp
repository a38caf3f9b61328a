// Histogramming and fold/invert bookkeeping.
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tcspc/analysis/folding.hpp"
#include "tcspc/sim/rng.hpp"

using namespace tcspc;

namespace {

EventRecord at(double t_ps) {
    EventRecord ev;
    ev.raw_time_ps = t_ps;
    return ev;
}

}  // namespace

TEST_CASE("histogram_events: empty stream gives an all-zero histogram") {
    const auto hist = histogram_events({}, 100.0, 12400.0);
    CHECK(hist.n_bins() == 124);
    CHECK(hist.total() == 0);
}

TEST_CASE("histogram_events: one event at t = 0 lands in bin 0") {
    const std::vector<EventRecord> events{at(0.0)};
    const auto hist = histogram_events(events, 100.0, 12400.0);
    CHECK(hist.counts[0] == 1);
    CHECK(hist.total() == 1);
}

TEST_CASE("histogram_events: out-of-span events are tallied, never dropped") {
    const std::vector<EventRecord> events{at(-5.0), at(999999.0), at(50.0)};
    const auto hist = histogram_events(events, 100.0, 12400.0);
    CHECK(hist.total() == 1);
    CHECK(hist.metadata_count("underflow") == 1);
    CHECK(hist.metadata_count("overflow") == 1);
}

TEST_CASE("histogram_events: uniform events fill bins uniformly (chi2 oracle)") {
    RandomStream rng(21, 0);
    std::vector<EventRecord> events;
    const int n = 1'000'000;
    const double span = 100000.0;
    events.reserve(n);
    for (int i = 0; i < n; ++i) events.push_back(at(rng.uniform() * span));
    const auto hist = histogram_events(events, 100.0, span);
    const double expected = static_cast<double>(n) / static_cast<double>(hist.n_bins());
    double chi2 = 0.0;
    for (auto c : hist.counts) chi2 += (c - expected) * (c - expected) / expected;
    const double chi2_ndf = chi2 / static_cast<double>(hist.n_bins());
    CHECK(chi2_ndf > 0.9);
    CHECK(chi2_ndf < 1.1);
}

TEST_CASE("fold_and_invert: input within one period is purely reversed") {
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    hist.counts = {5, 9, 1, 7};
    const auto folded = fold_and_invert(hist, 400.0);
    CHECK(folded.counts == std::vector<std::int64_t>{7, 1, 9, 5});
}

TEST_CASE("fold_and_invert: two identical periods add linearly") {
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    hist.counts = {5, 9, 1, 7, 5, 9, 1, 7};
    const auto folded = fold_and_invert(hist, 400.0);
    CHECK(folded.counts == std::vector<std::int64_t>{14, 2, 18, 10});
}

TEST_CASE("fold_and_invert: conserves total counts exactly") {
    RandomStream rng(22, 0);
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    hist.counts.resize(9920);
    for (auto& c : hist.counts) c = static_cast<std::int64_t>(rng.uniform() * 1000.0);
    const auto folded = fold_and_invert(hist, 12400.0);
    CHECK(folded.n_bins() == 124);
    CHECK(folded.total() == hist.total());
}

TEST_CASE("fold_and_invert: rejects a period that is not a whole number of bins") {
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    hist.counts = {1, 2, 3};
    CHECK_THROWS_AS(fold_and_invert(hist, 250.0), std::invalid_argument);
}

TEST_CASE("background_estimate: all-zero region estimates zero") {
    TimeHistogram folded;
    folded.bin_width_ps = 100.0;
    folded.counts.assign(124, 0);
    folded.counts[3] = 100;  // peak far from the default pre-peak region
    folded.counts[4] = 90;
    folded.counts[5] = 80;
    const auto est = background_estimate_default(folded);
    CHECK(est.level == 0.0);
    CHECK(est.n_bins == 10);
    CHECK(est.warning.empty());
}

TEST_CASE("background_estimate: recovers an injected uniform rate") {
    RandomStream rng(23, 0);
    TimeHistogram folded;
    folded.bin_width_ps = 100.0;
    folded.counts.assign(124, 0);
    const double rate = 400.0;
    for (auto& c : folded.counts) c = rng.poisson(rate);
    folded.counts[0] += 100000;  // a "peak"
    const auto est = background_estimate(folded, 3000.0, 10000.0);
    CHECK(std::fabs(est.level - rate) < 3.0 * std::sqrt(rate / static_cast<double>(est.n_bins)));
}

TEST_CASE("background_estimate: warns when the region overlaps the peak") {
    TimeHistogram folded;
    folded.bin_width_ps = 100.0;
    folded.counts.assign(124, 10);
    folded.counts[60] = 100000;
    folded.counts[61] = 90000;
    folded.counts[62] = 50000;
    const auto est = background_estimate(folded, -300.0, 400.0);
    CHECK(!est.warning.empty());
    CHECK_THROWS_AS(background_estimate(folded, 0.0, 300.0), std::invalid_argument);
}
