#include "tcspc/analysis/decay_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tcspc {

namespace {

constexpr double kBadLogLike = -1e300;

std::size_t peak_bin_of(std::span<const double> series) {
    const std::size_t n = series.size();
    if (n < 3) return 0;
    std::size_t best = 0;
    double best_sum = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
        const double s = series[i] + series[(i + 1) % n] + series[(i + 2) % n];
        if (s > best_sum) {
            best_sum = s;
            best = i;
        }
    }
    return best;
}

// Gaussian elimination with partial pivoting; returns false when singular.
template <int N>
bool solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N>& rhs) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int r = col + 1; r < N; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (int r = col + 1; r < N; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int col = N - 1; col >= 0; --col) {
        double s = rhs[col];
        for (int c = col + 1; c < N; ++c) s -= a[col][c] * rhs[c];
        rhs[col] = s / a[col][col];
    }
    for (double v : rhs)
        if (!std::isfinite(v)) return false;
    return true;
}

template <int N>
bool invert_matrix(const std::array<std::array<double, N>, N>& a,
                   std::array<std::array<double, N>, N>& inv) {
    for (int col = 0; col < N; ++col) {
        std::array<double, N> e{};
        e[col] = 1.0;
        if (!solve_linear<N>(a, e)) return false;
        for (int r = 0; r < N; ++r) inv[r][col] = e[r];
    }
    return true;
}

}  // namespace

void DecayShape::eval(double tau_ps, int k_start, std::span<double> w, std::span<double> dw_dtau,
                      std::span<double> d2w_dtau2) const {
    const double dt = bin_width_ps;
    const double x = std::exp(-dt / tau_ps);
    const double x_t = x * dt / (tau_ps * tau_ps);
    const double x_tt = x * (dt / (tau_ps * tau_ps)) * (dt / (tau_ps * tau_ps)) -
                        2.0 * x * dt / (tau_ps * tau_ps * tau_ps);

    double d = 1.0, d_x = 0.0, d_xx = 0.0;
    if (model == DecayModel::wrapped_exponential) {
        const double m = static_cast<double>(period_bins);
        const double xm = std::pow(x, m);
        d = 1.0 - xm;
        d_x = -m * xm / x;
        d_xx = -m * (m - 1.0) * xm / (x * x);
    }
    const double d2 = d * d;
    const double d3 = d2 * d;

    double pk = std::pow(x, static_cast<double>(k_start));
    double pkm1 = pk / x;
    double pkm2 = pkm1 / x;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double k = static_cast<double>(k_start) + static_cast<double>(i);
        const double n = pk * (1.0 - x);
        const double n_x = k * pkm1 - (k + 1.0) * pk;
        const double n_xx = k * (k - 1.0) * pkm2 - (k + 1.0) * k * pkm1;

        double value, w_x, w_xx;
        if (model == DecayModel::wrapped_exponential) {
            value = n / d;
            w_x = n_x / d - n * d_x / d2;
            w_xx = n_xx / d - 2.0 * n_x * d_x / d2 - n * d_xx / d2 + 2.0 * n * d_x * d_x / d3;
        } else {
            value = n;
            w_x = n_x;
            w_xx = n_xx;
        }
        w[i] = value;
        dw_dtau[i] = w_x * x_t;
        d2w_dtau2[i] = w_xx * x_t * x_t + w_x * x_tt;

        pkm2 = pkm1;
        pkm1 = pk;
        pk *= x;
    }
}

DecayFitProblem DecayFitProblem::prepare(std::span<const double> series, double bin_width_ps,
                                         FitWindow window, DecayModel model, bool fit_background,
                                         double fixed_background) {
    DecayFitProblem problem;
    problem.fit_background_ = fit_background;
    problem.fixed_background_ = fixed_background;
    problem.shape_.model = model;
    problem.shape_.bin_width_ps = bin_width_ps;
    problem.shape_.period_bins = static_cast<int>(series.size());

    const auto m = static_cast<std::int64_t>(series.size());
    if (m == 0) {
        problem.error_ = "empty histogram";
        return problem;
    }
    const auto ks = static_cast<std::int64_t>(std::llround(window.start_offset_ps / bin_width_ps));
    const auto ke = static_cast<std::int64_t>(std::llround(window.end_offset_ps / bin_width_ps));
    if (ks < 0 || ke <= ks) {
        problem.error_ = "empty fit window";
        return problem;
    }
    if (ke > m) {
        problem.error_ = "fit window exceeds the fold period";
        return problem;
    }

    const auto peak = static_cast<std::int64_t>(peak_bin_of(series));
    problem.k_start_ = static_cast<int>(ks);
    problem.y_.reserve(static_cast<std::size_t>(ke - ks));
    std::size_t occupied = 0;
    for (std::int64_t k = ks; k < ke; ++k) {
        const double v = series[static_cast<std::size_t>((peak + k) % m)];
        problem.y_.push_back(v);
        occupied += v > 0.0;
    }
    if (occupied < 3) problem.error_ = "fewer than 3 occupied bins in the fit window";
    return problem;
}

void DecayFitProblem::model_values(const std::array<double, 3>& theta) const {
    const std::size_t n = y_.size();
    mu_.resize(n);
    w_.resize(n);
    dw_.resize(n);
    d2w_.resize(n);
    shape_.eval(theta[1], k_start_, w_, dw_, d2w_);
    const double b = fit_background_ ? theta[2] : fixed_background_;
    for (std::size_t i = 0; i < n; ++i) mu_[i] = theta[0] * w_[i] + b;
}

double DecayFitProblem::log_likelihood(const std::array<double, 3>& theta) const {
    model_values(theta);
    double ll = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (mu_[i] <= 0.0) return kBadLogLike;
        ll += y_[i] * std::log(mu_[i]) - mu_[i];
    }
    return std::isfinite(ll) ? ll : kBadLogLike;
}

std::array<double, 3> DecayFitProblem::score(const std::array<double, 3>& theta) const {
    model_values(theta);
    std::array<double, 3> g{};
    for (std::size_t i = 0; i < y_.size(); ++i) {
        if (mu_[i] <= 0.0) return {0.0, 0.0, 0.0};
        const double r = y_[i] / mu_[i] - 1.0;
        g[0] += r * w_[i];
        g[1] += r * theta[0] * dw_[i];
        if (fit_background_) g[2] += r;
    }
    return g;
}

FitResult DecayFitProblem::solve(const FitHints& hints) const {
    FitResult result;
    if (!valid()) {
        result.diagnostics = error_;
        return result;
    }

    const std::size_t n = y_.size();
    const double dt = shape_.bin_width_ps;
    const double tau_lo = dt / 50.0;
    const double tau_hi = 1e6 * dt;

    double sum_y = 0.0, sum_ty = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum_y += y_[i];
        sum_ty += y_[i] * (static_cast<double>(i) + 0.5) * dt;
    }
    // Mean residual time in the window seeds tau unless a hint overrides it.
    double tau0 = std::clamp(sum_y > 0.0 ? sum_ty / sum_y : dt, 2.0 * tau_lo, 0.5 * tau_hi);
    if (hints.tau_start_ps > 0.0) tau0 = std::clamp(hints.tau_start_ps, 2.0 * tau_lo, 0.5 * tau_hi);
    double b0 = fixed_background_;
    if (fit_background_) {
        const std::size_t tail = std::min<std::size_t>(5, n);
        double s = 0.0;
        for (std::size_t i = n - tail; i < n; ++i) s += y_[i];
        b0 = std::max(s / static_cast<double>(tail), 1e-9);
    }

    auto initial_amplitude = [&](double tau) {
        std::array<double, 3> theta{1.0, tau, 0.0};
        model_values(theta);
        double sw = 0.0;
        for (double v : w_) sw += v;
        const double bg = fit_background_ ? b0 : fixed_background_;
        return std::max((sum_y - bg * static_cast<double>(n)) / std::max(sw, 1e-12),
                        1e-9 * (sum_y + 1.0));
    };

    const int n_free = this->n_free();
    std::array<double, 3> best{};
    double best_ll = kBadLogLike;
    bool best_converged = false;

    const std::vector<double> tau_factors =
        hints.single_start ? std::vector<double>{1.0} : std::vector<double>{0.5, 1.0, 2.0};
    for (const double tau_factor : tau_factors) {
        std::array<double, 3> theta{0.0, std::clamp(tau0 * tau_factor, tau_lo, tau_hi), b0};
        theta[0] = initial_amplitude(theta[1]);
        double ll = log_likelihood(theta);
        if (ll <= kBadLogLike) {
            theta[2] = std::max(b0, 1e-6);
            ll = log_likelihood(theta);
            if (ll <= kBadLogLike) continue;
        }

        bool converged = false;
        double ridge = 0.0;
        for (int iter = 0; iter < 200; ++iter) {
            model_values(theta);
            std::array<double, 3> g{};
            std::array<std::array<double, 3>, 3> info{};
            bool ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                if (mu_[i] <= 0.0) {
                    ok = false;
                    break;
                }
                const double r = y_[i] / mu_[i] - 1.0;
                const std::array<double, 3> dmu{w_[i], theta[0] * dw_[i], 1.0};
                for (int a = 0; a < n_free; ++a) {
                    g[a] += r * dmu[a];
                    for (int b = 0; b < n_free; ++b) info[a][b] += dmu[a] * dmu[b] / mu_[i];
                }
            }
            if (!ok) break;

            double trace = 0.0;
            for (int a = 0; a < n_free; ++a) trace += info[a][a];
            std::array<double, 3> step = g;
            bool solved = false;
            for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
                auto damped = info;
                for (int a = 0; a < n_free; ++a)
                    damped[a][a] += ridge * (info[a][a] + 1e-12 * trace) + 1e-14 * trace;
                step = g;
                if (n_free == 3) {
                    solved = solve_linear<3>(damped, step);
                } else {
                    std::array<std::array<double, 2>, 2> a2{
                        {{damped[0][0], damped[0][1]}, {damped[1][0], damped[1][1]}}};
                    std::array<double, 2> s2{step[0], step[1]};
                    solved = solve_linear<2>(a2, s2);
                    step = {s2[0], s2[1], 0.0};
                }
                if (!solved) ridge = std::max(ridge * 10.0, 1e-8);
            }
            if (!solved) break;

            const std::array<double, 3> scale{std::max(std::fabs(theta[0]), 1e-9 * (sum_y + 1.0)),
                                              std::max(std::fabs(theta[1]), dt),
                                              std::max(std::fabs(theta[2]), 1e-6)};
            double alpha = 1.0;
            bool accepted = false;
            std::array<double, 3> trial = theta;
            double trial_ll = ll;
            const double ll_tol = 1e-12 * (1.0 + std::fabs(ll));
            for (int ls = 0; ls < 40; ++ls) {
                for (int a = 0; a < n_free; ++a) trial[a] = theta[a] + alpha * step[a];
                if (trial[1] >= tau_lo && trial[1] <= tau_hi) {
                    trial_ll = log_likelihood(trial);
                    if (trial_ll > ll - ll_tol && trial_ll > kBadLogLike) {
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // A proposal that is pure rounding noise at the optimum.
                double rel0 = 0.0;
                for (int a = 0; a < n_free; ++a)
                    rel0 = std::max(rel0, std::fabs(step[a]) / scale[a]);
                converged = rel0 < 1e-9;
                break;
            }

            double rel = 0.0;
            for (int a = 0; a < n_free; ++a)
                rel = std::max(rel, std::fabs(alpha * step[a]) / scale[a]);
            theta = trial;
            ll = trial_ll;
            ridge *= 0.1;
            if (rel < 1e-9) {
                converged = true;
                break;
            }
        }

        const double tie = 1e-9 * (1.0 + std::fabs(best_ll));
        if (ll > best_ll + tie || (ll > best_ll - tie && converged && !best_converged)) {
            best_ll = std::max(ll, best_ll);
            best = theta;
            best_converged = converged;
        }
    }

    result.amplitude = best[0];
    result.tau_ps = best[1];
    result.background_level = fit_background_ ? best[2] : fixed_background_;
    result.n_bins_used = static_cast<int>(n);
    result.log_likelihood = best_ll;
    if (best_ll <= kBadLogLike) {
        result.diagnostics = "optimizer failed to find a valid likelihood";
        return result;
    }

    // Observed information at the optimum.
    model_values(best);
    std::array<std::array<double, 3>, 3> obs{};
    double deviance = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = mu_[i];
        const double r = y_[i] / m - 1.0;
        const std::array<double, 3> dmu{w_[i], best[0] * dw_[i], 1.0};
        const std::array<std::array<double, 3>, 3> d2mu{
            {{0.0, dw_[i], 0.0}, {dw_[i], best[0] * d2w_[i], 0.0}, {0.0, 0.0, 0.0}}};
        for (int a = 0; a < n_free; ++a)
            for (int b = 0; b < n_free; ++b)
                obs[a][b] += y_[i] / (m * m) * dmu[a] * dmu[b] - r * d2mu[a][b];
        deviance += y_[i] > 0.0 ? y_[i] * std::log(y_[i] / m) - (y_[i] - m) : m;
    }
    deviance *= 2.0;
    const int ndf = static_cast<int>(n) - n_free;
    result.gof = ndf > 0 ? deviance / static_cast<double>(ndf) : 0.0;

    double trace = 0.0;
    for (int a = 0; a < n_free; ++a) trace += std::fabs(obs[a][a]);
    for (int a = 0; a < n_free; ++a) obs[a][a] += 1e-12 * trace;  // unidentifiable-direction guard

    bool cov_ok = false;
    if (n_free == 3) {
        std::array<std::array<double, 3>, 3> inv{};
        cov_ok = invert_matrix<3>(obs, inv);
        if (cov_ok) result.covariance = inv;
    } else {
        std::array<std::array<double, 2>, 2> a2{{{obs[0][0], obs[0][1]}, {obs[1][0], obs[1][1]}}};
        std::array<std::array<double, 2>, 2> inv{};
        cov_ok = invert_matrix<2>(a2, inv);
        if (cov_ok) {
            result.covariance[0][0] = inv[0][0];
            result.covariance[0][1] = inv[0][1];
            result.covariance[1][0] = inv[1][0];
            result.covariance[1][1] = inv[1][1];
        }
    }
    cov_ok = cov_ok && result.covariance[1][1] >= 0.0;
    result.tau_stat_ps = cov_ok ? std::sqrt(result.covariance[1][1]) : 0.0;
    result.converged = best_converged && cov_ok;
    if (!best_converged) result.diagnostics = "optimizer stalled before convergence";
    if (!cov_ok) result.diagnostics = "singular observed information";
    return result;
}

FitResult fit_decay(const TimeHistogram& folded, FitWindow window, DecayModel model,
                    bool fit_background, double fixed_background) {
    std::vector<double> series(folded.counts.begin(), folded.counts.end());
    return fit_decay_values(series, folded.bin_width_ps, window, model, fit_background,
                            fixed_background);
}

FitResult fit_decay_values(std::span<const double> series, double bin_width_ps, FitWindow window,
                           DecayModel model, bool fit_background, double fixed_background,
                           const FitHints& hints) {
    return DecayFitProblem::prepare(series, bin_width_ps, window, model, fit_background,
                                    fixed_background)
        .solve(hints);
}

}  // namespace tcspc
