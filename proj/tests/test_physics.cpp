// Excitation and emission physics against closed-form oracles.
//
// Excitation: P = sin^2 sqrt((gamma^2/4 pi I_s)(E t_uv / w^2)) with
// I_s = pi h c gamma / (3 lambda^3). For the Cd+ P3/2 preset
// (tau = 2.647 ns, lambda = 214.5 nm, E = 10 pJ, t_uv = 1 ps, w = 6 um)
// the argument evaluates to 0.3961961 and P to 0.3465595 (hand-computed);
// the nominal operating point quoted for this pulse energy is of order ten
// percent, so the preset is checked to sit in the single-excitation regime
// rather than at a Rabi extremum.
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "tcspc/sim/config.hpp"
#include "tcspc/sim/physics.hpp"
#include "tcspc/sim/rng.hpp"

using namespace tcspc;

namespace {

AtomicTransition p12() { return {"P1/2", 3.148, 226.5}; }
AtomicTransition p32() { return {"P3/2", 2.647, 214.5}; }

}  // namespace

TEST_CASE("excitation probability: zero pulse energy excites nothing") {
    CHECK(excitation_probability({0.0, 1.0, 6.0}, p32()) == 0.0);
}

TEST_CASE("excitation probability: pi pulse gives unity") {
    // Scale the preset energy so the argument hits (pi/2)^2 exactly:
    // arg(10 pJ) = 0.39619613, and arg is linear in E.
    const double e_pi = 10.0 * (M_PI / 2.0) * (M_PI / 2.0) / 0.39619613130;
    const double p = excitation_probability({e_pi, 1.0, 6.0}, p32());
    CHECK(p == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("excitation probability: preset pulse values") {
    const double p32_value = excitation_probability({10.0, 1.0, 6.0}, p32());
    const double p12_value = excitation_probability({10.0, 1.0, 6.0}, p12());
    CHECK(p32_value == doctest::Approx(0.34655954).epsilon(1e-6));
    CHECK(p12_value == doctest::Approx(0.34356437).epsilon(1e-6));
    // Single-excitation regime: well away from 0 and from the first maximum.
    CHECK(p32_value > 0.03);
    CHECK(p32_value < 0.5);
}

TEST_CASE("excitation probability: monotone in E only up to the first Rabi maximum") {
    const double e_pi = 10.0 * (M_PI / 2.0) * (M_PI / 2.0) / 0.39619613130;
    double previous = 0.0;
    for (double e = 1.0; e < e_pi; e += 5.0) {
        const double p = excitation_probability({e, 1.0, 6.0}, p32());
        CHECK(p > previous);
        previous = p;
    }
    CHECK(excitation_probability({1.3 * e_pi, 1.0, 6.0}, p32()) <
          excitation_probability({e_pi, 1.0, 6.0}, p32()));
}

TEST_CASE("excitation probability: rejects non-finite and negative inputs") {
    CHECK_THROWS_AS(excitation_probability({-1.0, 1.0, 6.0}, p32()), std::invalid_argument);
    CHECK_THROWS_AS(excitation_probability({10.0, -1.0, 6.0}, p32()), std::invalid_argument);
    CHECK_THROWS_AS(
        excitation_probability({std::numeric_limits<double>::quiet_NaN(), 1.0, 6.0}, p32()),
        std::invalid_argument);
    AtomicTransition bad = p32();
    bad.lifetime_ns = -2.0;
    CHECK_THROWS_AS(excitation_probability({10.0, 1.0, 6.0}, bad), std::invalid_argument);
}

TEST_CASE("emission delay: exponential CDF at tau is 1 - 1/e") {
    RandomStream rng(11, 0);
    const BeatModulation off{};
    const double tau = p12().lifetime_ps();
    const int n = 1'000'000;
    int below = 0;
    for (int i = 0; i < n; ++i) below += sample_emission_delay(p12(), off, rng) <= tau;
    const double expected = 1.0 - std::exp(-1.0);
    const double sigma = std::sqrt(expected * (1.0 - expected) / n);
    CHECK(std::fabs(static_cast<double>(below) / n - expected) < 3.0 * sigma);
}

TEST_CASE("emission delay: sample mean reproduces tau") {
    RandomStream rng(12, 0);
    const BeatModulation off{};
    const double tau = p32().lifetime_ps();
    const int n = 1'000'000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += sample_emission_delay(p32(), off, rng);
    const double mean = sum / n;
    CHECK(std::fabs(mean - tau) < 3.0 * tau / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("emission delay: beat-modulated density matches quadrature oracle") {
    // A = 0.2, omega*tau = 5; expected bin probabilities by Simpson
    // integration of f(t) = e^(-t/tau)(1 + A cos(w t + phi)), an
    // independent route from the sampler's analytic CDF inversion.
    const AtomicTransition tr = p32();
    const double tau = tr.lifetime_ps();
    BeatModulation beats;
    beats.enabled = true;
    beats.amplitude = 0.2;
    beats.frequency_rad_per_s = 5.0 / (tau * 1e-12);
    beats.phase_rad = 0.7;

    const auto density = [&](double t) {
        return std::exp(-t / tau) *
               (1.0 + beats.amplitude * std::cos(beats.frequency_rad_per_s * 1e-12 * t +
                                                 beats.phase_rad));
    };
    const auto simpson = [&](double a, double b, int steps) {
        const double h = (b - a) / steps;
        double s = density(a) + density(b);
        for (int i = 1; i < steps; ++i) s += density(a + i * h) * (i % 2 ? 4.0 : 2.0);
        return s * h / 3.0;
    };

    const int n_bins = 120;
    const double t_hi = 8.0 * tau;
    const double total = simpson(0.0, 60.0 * tau, 60000);
    std::vector<double> prob(n_bins + 1, 0.0);
    for (int b = 0; b < n_bins; ++b)
        prob[b] = simpson(b * t_hi / n_bins, (b + 1) * t_hi / n_bins, 64) / total;
    prob[n_bins] = 1.0;
    for (int b = 0; b < n_bins; ++b) prob[n_bins] -= prob[b];

    RandomStream rng(13, 0);
    const int n = 2'000'000;
    std::vector<std::int64_t> observed(n_bins + 1, 0);
    for (int i = 0; i < n; ++i) {
        const double t = sample_emission_delay(tr, beats, rng);
        const int b = t >= t_hi ? n_bins : static_cast<int>(t / (t_hi / n_bins));
        ++observed[static_cast<std::size_t>(b)];
    }

    double chi2 = 0.0;
    for (int b = 0; b <= n_bins; ++b) {
        const double expected = prob[b] * n;
        chi2 += (observed[b] - expected) * (observed[b] - expected) / expected;
    }
    const double chi2_ndf = chi2 / (n_bins + 1);
    CHECK(chi2_ndf > 0.8);
    CHECK(chi2_ndf < 1.2);
}

TEST_CASE("emission delay: amplitude >= 1 is a domain error") {
    RandomStream rng(14, 0);
    BeatModulation beats;
    beats.enabled = true;
    beats.amplitude = 1.0;
    CHECK_THROWS_AS(sample_emission_delay(p32(), beats, rng), std::invalid_argument);
}

TEST_CASE("emission delay: beats at zero amplitude leave the distribution unchanged") {
    // Two-sample Kolmogorov-Smirnov between beats-off and beats-enabled-A=0.
    const int n = 1'000'000;
    std::vector<double> off_sample(n), on_sample(n);
    {
        RandomStream rng(15, 0);
        const BeatModulation off{};
        for (int i = 0; i < n; ++i) off_sample[i] = sample_emission_delay(p12(), off, rng);
    }
    {
        RandomStream rng(16, 0);
        BeatModulation on;
        on.enabled = true;
        on.amplitude = 0.0;
        on.frequency_rad_per_s = 1e9;
        for (int i = 0; i < n; ++i) on_sample[i] = sample_emission_delay(p12(), on, rng);
    }
    std::sort(off_sample.begin(), off_sample.end());
    std::sort(on_sample.begin(), on_sample.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < off_sample.size() && j < on_sample.size()) {
        if (off_sample[i] <= on_sample[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / n - static_cast<double>(j) / n));
    }
    const double ne = std::sqrt(n / 2.0);
    const double lambda = (ne + 0.12 + 0.11 / ne) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k)
        p += 2.0 * (k % 2 ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    CHECK(p > 0.01);
}

TEST_CASE("zeeman splitting helper") {
    // g = 4/3, B = 0.5 G, delta_m = 2 -> 1.1725e7 rad/s
    CHECK(zeeman_splitting_rad_per_s(4.0 / 3.0, 0.5, 2) ==
          doctest::Approx(1.17255e7).epsilon(1e-3));
}
