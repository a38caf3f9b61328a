// Template extraction on exact-model data, error combination arithmetic,
// and the statistical precision predictor.
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "tcspc/analysis/decay_fit.hpp"
#include "tcspc/analysis/extract.hpp"
#include "tcspc/analysis/precision.hpp"
#include "tcspc/sim/rng.hpp"

using namespace tcspc;

namespace {

constexpr double kBin = 100.0;
constexpr int kM = 124;
constexpr double kPeriod = kBin * kM;

}  // namespace

TEST_CASE("extract_lifetime: delta response and zero prompt degenerates to the plain fit") {
    const double tau = 3148.0;
    RandomStream rng(41, 0);
    const double x = std::exp(-kBin / tau);
    const double norm = 1.0 - std::pow(x, kM);
    TimeHistogram data;
    data.bin_width_ps = kBin;
    double pk = 1.0;
    for (int k = 0; k < kM; ++k) {
        data.counts.push_back(rng.poisson(180000.0 * pk * (1.0 - x) / norm + 25.0));
        pk *= x;
    }
    TimeHistogram irf;
    irf.bin_width_ps = kBin;
    irf.counts.assign(kM, 0);
    irf.counts[0] = 1000000;

    ExtractOptions options;
    const auto extraction = extract_lifetime(data, irf, options);
    REQUIRE(extraction.success);

    const auto plain = fit_decay(data, {0.0, options.scan.resolved_end_ps(kPeriod)},
                                 DecayModel::wrapped_exponential, true);
    REQUIRE(plain.converged);
    const double combined =
        std::sqrt(plain.tau_stat_ps * plain.tau_stat_ps +
                  extraction.result.stat_error_ps * extraction.result.stat_error_ps +
                  extraction.result.sys_error_ps * extraction.result.sys_error_ps);
    CHECK(std::fabs(extraction.result.tau_ps - plain.tau_ps) < combined);
    CHECK(std::fabs(extraction.result.tau_ps - tau) < 3.0 * combined);
    CHECK(extraction.prompt_fraction < 0.05);
}

TEST_CASE("combine_measurements: weighted average matches the published arithmetic") {
    // {2.646 +- 0.002 stat, 0.010 sys} and {2.649 +- 0.003 stat, 0.010 sys}
    // -> 2.647 with final error 0.010.
    LifetimeResult quad{"quadrupole", 2646.0, 2.0, 10.0, 0.0, "quadrature"};
    LifetimeResult linear{"linear", 2649.0, 3.0, 10.0, 0.0, "quadrature"};
    const auto final_result = combine_measurements({quad, linear}, true);
    CHECK(final_result.tau_ps == doctest::Approx(2646.923).epsilon(1e-6));
    CHECK(std::round(final_result.tau_ps) == 2647.0);
    CHECK(final_result.sys_error_ps == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(final_result.final_error_ps == doctest::Approx(10.1375).epsilon(1e-3));
    CHECK(std::round(final_result.final_error_ps) == 10.0);
}

TEST_CASE("combine_measurements: single measurement passes through with quadrature error") {
    // {3.148, 0.005 stat, 0.010 sys} -> final error 0.011.
    LifetimeResult only{"quadrupole", 3148.0, 5.0, 10.0, 0.0, "quadrature"};
    const auto combined = combine_measurements({only}, true);
    CHECK(combined.tau_ps == 3148.0);
    CHECK(combined.final_error_ps == doctest::Approx(11.1803).epsilon(1e-4));
    CHECK(std::round(combined.final_error_ps) == 11.0);
}

TEST_CASE("combine_measurements: identical pair keeps the value, shrinks stat by sqrt(2)") {
    LifetimeResult r{"t", 3000.0, 4.0, 8.0, 0.0, "quadrature"};
    const auto combined = combine_measurements({r, r}, true);
    CHECK(combined.tau_ps == doctest::Approx(3000.0));
    CHECK(combined.stat_error_ps == doctest::Approx(4.0 / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(combined.sys_error_ps == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("combine_measurements: zero statistical error is a domain error") {
    LifetimeResult bad{"t", 3000.0, 0.0, 8.0, 0.0, "quadrature"};
    CHECK_THROWS_AS(combine_measurements({bad}, true), std::invalid_argument);
    CHECK_THROWS_AS(combine_measurements({}, true), std::invalid_argument);
}

TEST_CASE("predict_statistical_precision: 3000 cps for one minute gives ~0.24%") {
    const double rel = predict_statistical_precision(3000.0, 60.0, 3148.0, kPeriod);
    CHECK(rel == doctest::Approx(1.0 / std::sqrt(180000.0)).epsilon(1e-12));
    CHECK(rel > 0.0022);
    CHECK(rel < 0.0026);
}

TEST_CASE("predict_statistical_precision: four times the duration halves the value") {
    const double one = predict_statistical_precision(3000.0, 60.0, 3148.0, kPeriod);
    const double four = predict_statistical_precision(3000.0, 240.0, 3148.0, kPeriod);
    CHECK(four == doctest::Approx(one / 2.0).epsilon(1e-12));
}

TEST_CASE("predict_statistical_precision: rejects non-positive inputs") {
    CHECK_THROWS_AS(predict_statistical_precision(0.0, 60.0, 3148.0, kPeriod),
                    std::invalid_argument);
    CHECK_THROWS_AS(predict_statistical_precision(3000.0, 60.0, -1.0, kPeriod),
                    std::invalid_argument);
}
