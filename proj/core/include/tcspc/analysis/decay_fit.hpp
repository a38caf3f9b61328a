#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tcspc/histogram.hpp"

namespace tcspc {

enum class DecayModel {
    bare_exponential,    // f(t) = e^(-t/tau)
    wrapped_exponential  // f(t) = e^(-(t mod T)/tau) / (1 - e^(-T/tau))
};

// Fit range measured from the peak bin; circular within the fold period.
struct FitWindow {
    double start_offset_ps = 0.0;
    double end_offset_ps = 0.0;
};

struct FitResult {
    double tau_ps = 0.0;
    double tau_stat_ps = 0.0;  // 1 sigma, from observed information
    double amplitude = 0.0;    // decay counts per fold period
    double background_level = 0.0;  // counts per bin
    double prompt_fraction = 0.0;   // populated by template extraction only
    std::array<std::array<double, 3>, 3> covariance{};  // order: amplitude, tau, background
    double gof = 0.0;  // Poisson deviance / ndf
    int n_bins_used = 0;
    bool converged = false;
    double log_likelihood = 0.0;
    std::string diagnostics;
};

// Bin-integrated decay shape anchored at the peak bin, with analytic first
// and second tau-derivatives. With x = e^(-dt/tau) the wrapped form is
// w_k = (x^k - x^(k+1)) / (1 - x^M) and the bare form drops the denominator;
// summed over a full period the wrapped shape is exactly 1.
struct DecayShape {
    DecayModel model = DecayModel::wrapped_exponential;
    double bin_width_ps = 100.0;
    int period_bins = 124;

    void eval(double tau_ps, int k_start, std::span<double> w, std::span<double> dw_dtau,
              std::span<double> d2w_dtau2) const;
};

// Optimizer seeding overrides; the default is the spec'd multi-start from
// {tau0/2, tau0, 2 tau0} with tau0 the windowed mean residual time.
struct FitHints {
    double tau_start_ps = 0.0;  // > 0 replaces tau0
    bool single_start = false;  // skip the 0.5x/2x companions
};

// A prepared Poisson-likelihood problem over a circular fit window.
// Parameters are theta = (amplitude, tau_ps, background_per_bin); the
// background entry is held at fixed_background when fit_background is false.
// Instances carry scratch buffers: not safe for concurrent use.
class DecayFitProblem {
public:
    static DecayFitProblem prepare(std::span<const double> series, double bin_width_ps,
                                   FitWindow window, DecayModel model, bool fit_background,
                                   double fixed_background);

    double log_likelihood(const std::array<double, 3>& theta) const;
    std::array<double, 3> score(const std::array<double, 3>& theta) const;

    FitResult solve(const FitHints& hints = {}) const;

    int n_free() const { return fit_background_ ? 3 : 2; }
    const std::vector<double>& window_counts() const { return y_; }
    bool valid() const { return error_.empty(); }
    const std::string& error() const { return error_; }

private:
    std::vector<double> y_;
    DecayShape shape_;
    int k_start_ = 0;
    bool fit_background_ = true;
    double fixed_background_ = 0.0;
    std::string error_;
    mutable std::vector<double> mu_, w_, dw_, d2w_;

    void model_values(const std::array<double, 3>& theta) const;
};

// Maximum-likelihood exponential fit of a folded histogram over a
// peak-relative window. Data problems (empty window, all-zero counts, a
// stalled optimizer) come back as converged = false with a diagnostic,
// never as an exception.
FitResult fit_decay(const TimeHistogram& folded, FitWindow window, DecayModel model,
                    bool fit_background, double fixed_background = 0.0);

// Same fit on a real-valued series (noiseless template spectra).
FitResult fit_decay_values(std::span<const double> series, double bin_width_ps, FitWindow window,
                           DecayModel model, bool fit_background, double fixed_background = 0.0,
                           const FitHints& hints = {});

}  // namespace tcspc
