// TDC and detector response against quantization/mixture oracles.
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tcspc/sim/instrument.hpp"

using namespace tcspc;

namespace {

TdcSpec ideal_tdc() {
    TdcSpec tdc;
    tdc.jitter_sigma_ps = 0.0;
    tdc.scale_error_ppm = 0.0;
    tdc.inl_rms_ps = 0.0;
    return tdc;
}

}  // namespace

TEST_CASE("inl pattern: zero rms gives an all-zero table") {
    const auto inl = generate_inl_pattern(ideal_tdc(), 124);
    for (double v : inl) CHECK(v == 0.0);
}

TEST_CASE("inl pattern: pure function of (seed, n_bins)") {
    TdcSpec tdc = ideal_tdc();
    tdc.inl_rms_ps = 20.0;
    tdc.inl_seed = 42;
    const auto a = generate_inl_pattern(tdc, 124);
    const auto b = generate_inl_pattern(tdc, 124);
    CHECK(a == b);
    tdc.inl_seed = 43;
    CHECK(generate_inl_pattern(tdc, 124) != a);
}

TEST_CASE("inl pattern: zero mean, rms within 5% of the spec value") {
    TdcSpec tdc = ideal_tdc();
    tdc.inl_rms_ps = 20.0;
    for (std::size_t n : {124u, 9920u}) {
        const auto inl = generate_inl_pattern(tdc, n);
        double mean = 0.0, ms = 0.0;
        for (double v : inl) mean += v;
        mean /= static_cast<double>(n);
        for (double v : inl) ms += v * v;
        const double rms = std::sqrt(ms / static_cast<double>(n));
        CHECK(std::fabs(mean) < 1e-9);
        CHECK(rms > 19.0);
        CHECK(rms < 21.0);
    }
}

TEST_CASE("digitize: pure floor quantization") {
    RandomStream rng(1, 0);
    CHECK(digitize(437.0, ideal_tdc(), {}, rng) == 400.0);
    CHECK(digitize(499.999, ideal_tdc(), {}, rng) == 400.0);
    CHECK(digitize(500.0, ideal_tdc(), {}, rng) == 500.0);
}

TEST_CASE("digitize: 20 ppm timebase scale shifts 1 us by 20 ps before flooring") {
    RandomStream rng(1, 0);
    TdcSpec tdc = ideal_tdc();
    tdc.scale_error_ppm = 20.0;
    // 1e6 ps * (1 + 20e-6) = 1,000,020 ps -> still the 1,000,000 ps bin
    CHECK(digitize(1e6, tdc, {}, rng) == 1'000'000.0);
    // 999,990 ps scales past the edge and lands one bin up
    CHECK(digitize(999'990.0, tdc, {}, rng) == 1'000'000.0);
    CHECK(digitize(999'990.0, ideal_tdc(), {}, rng) == 999'900.0);
}

TEST_CASE("digitize: jitter plus quantization noise has sigma sqrt(145^2 + bin^2/12)") {
    TdcSpec tdc = ideal_tdc();
    tdc.jitter_sigma_ps = 145.0;
    RandomStream rng(2, 0);
    const int n = 1'000'000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = 5000.0 + rng.uniform() * 1000.0;
        const double e = digitize(t, tdc, {}, rng) - t;
        sum += e;
        sum2 += e * e;
    }
    const double var = sum2 / n - (sum / n) * (sum / n);
    const double expected = std::sqrt(145.0 * 145.0 + 100.0 * 100.0 / 12.0);  // 147.85
    CHECK(std::sqrt(var) == doctest::Approx(expected).epsilon(0.03));
}

TEST_CASE("irf sampler: delta-like response is the identity") {
    ParametricIrf irf;  // rise 150 / tail 500 defaults
    irf.rise_sigma_ps = 0.0;
    irf.tail_ps = 0.0;
    RandomStream rng(3, 0);
    CHECK(apply_instrument_response(1234.5, irf, rng) == 1234.5);
    CHECK(IrfSampler(InstrumentResponse{irf}).is_delta());
}

TEST_CASE("irf sampler: echo occupancy matches the mixture weights") {
    // Echoes at 3 ns and 6 ns with amplitudes 0.05 and 0.03: the fraction of
    // draws promoted to an echo must be (0.05+0.03)/1.08.
    ParametricIrf irf;
    irf.rise_sigma_ps = 10.0;
    irf.tail_ps = 50.0;
    irf.echoes = {{3000.0, 0.05}, {6000.0, 0.03}};
    const IrfSampler sampler{InstrumentResponse{irf}};
    RandomStream rng(4, 0);
    const int n = 1'000'000;
    int in_echo = 0;
    for (int i = 0; i < n; ++i) in_echo += sampler.sample_delay_ps(rng) > 1500.0;
    const double expected = 0.08 / 1.08;
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::fabs(static_cast<double>(in_echo) / n - expected) < 4.0 * sigma);
}

TEST_CASE("irf sampler: single-bin empirical response is a constant shift") {
    EmpiricalIrf irf;
    irf.bin_width_ps = 100.0;
    irf.origin_ps = 0.0;
    irf.weights.assign(124, 0.0);
    irf.weights[7] = 1.0;  // +700 ps
    RandomStream rng(5, 0);
    for (int i = 0; i < 10; ++i)
        CHECK(apply_instrument_response(50.0, InstrumentResponse{irf}, rng) == 750.0);
}

TEST_CASE("irf sampler: unnormalized empirical response is a domain error") {
    EmpiricalIrf irf;
    irf.weights = {0.5, 0.4};  // sums to 0.9
    CHECK_THROWS_AS(IrfSampler(InstrumentResponse{irf}), std::invalid_argument);
}
