#include "tcspc/analysis/extract.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcspc/analysis/folding.hpp"
#include "tcspc/analysis/reconvolution.hpp"

namespace tcspc {

namespace {

constexpr double kBadLogLike = -1e300;

// Gaussian elimination with partial pivoting on a 4x4 system.
bool solve4(std::array<std::array<double, 4>, 4> a, std::array<double, 4>& rhs) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) < 1e-300) return false;
        std::swap(a[pivot], a[col]);
        std::swap(rhs[pivot], rhs[col]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            rhs[r] -= f * rhs[col];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double s = rhs[col];
        for (int c = col + 1; c < 4; ++c) s -= a[col][c] * rhs[c];
        rhs[col] = s / a[col][col];
    }
    for (double v : rhs)
        if (!std::isfinite(v)) return false;
    return true;
}

// Poisson likelihood of the folded data against the reconvolution family
//   mu_k = A [ (1 - pf) (irf (x) wrapped_exp(tau))_k + pf irf_k ] + b,
// the convolution circular over the fold period. theta = (A, tau, pf, b).
struct ReconvolutionProblem {
    const std::vector<double>& y;
    const std::vector<double>& irf;
    double bin_ps;

    std::vector<double> wexp, dwexp, conv, dconv, mu;

    explicit ReconvolutionProblem(const std::vector<double>& counts,
                                  const std::vector<double>& irf_density, double bin_width_ps)
        : y(counts), irf(irf_density), bin_ps(bin_width_ps) {
        const std::size_t m = y.size();
        wexp.resize(m);
        dwexp.resize(m);
        conv.resize(m);
        dconv.resize(m);
        mu.resize(m);
    }

    void update_shape(double tau) {
        const std::size_t m = y.size();
        const double x = std::exp(-bin_ps / tau);
        const double x_t = x * bin_ps / (tau * tau);
        const double xm = std::pow(x, static_cast<double>(m));
        const double d = 1.0 - xm;
        const double d_x = -static_cast<double>(m) * xm / x;
        double pk = 1.0, pkm1 = 1.0 / x;
        for (std::size_t k = 0; k < m; ++k) {
            const double kk = static_cast<double>(k);
            const double n = pk * (1.0 - x);
            const double n_x = kk * pkm1 - (kk + 1.0) * pk;
            wexp[k] = n / d;
            dwexp[k] = (n_x / d - n * d_x / (d * d)) * x_t;
            pkm1 = pk;
            pk *= x;
        }
        for (std::size_t j = 0; j < m; ++j) {
            double c = 0.0, dc = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
                const std::size_t i = (j + m - k) % m;
                c += irf[k] * wexp[i];
                dc += irf[k] * dwexp[i];
            }
            conv[j] = c;
            dconv[j] = dc;
        }
    }

    void update_mu(const std::array<double, 4>& theta) {
        for (std::size_t k = 0; k < y.size(); ++k)
            mu[k] = theta[0] * ((1.0 - theta[2]) * conv[k] + theta[2] * irf[k]) + theta[3];
    }

    double log_likelihood(const std::array<double, 4>& theta) {
        update_shape(theta[1]);
        update_mu(theta);
        double ll = 0.0;
        for (std::size_t k = 0; k < y.size(); ++k) {
            if (mu[k] <= 0.0) return kBadLogLike;
            ll += y[k] * std::log(mu[k]) - mu[k];
        }
        return std::isfinite(ll) ? ll : kBadLogLike;
    }
};

struct ReconvolutionFit {
    std::array<double, 4> theta{};  // A, tau_ps, prompt_fraction, background
    double tau_stat_ps = 0.0;
    double gof = 0.0;
    bool converged = false;
};

ReconvolutionFit fit_reconvolution(const std::vector<double>& counts,
                                   const std::vector<double>& irf_density, double bin_ps,
                                   double tau0, double pf0, double b0, double pf_max) {
    ReconvolutionFit out;
    const std::size_t m = counts.size();
    double total = 0.0;
    for (double v : counts) total += v;

    ReconvolutionProblem problem(counts, irf_density, bin_ps);
    std::array<double, 4> theta{std::max(total - b0 * static_cast<double>(m), 1.0),
                                tau0, std::clamp(pf0, 0.0, pf_max), std::max(b0, 1e-9)};
    double ll = problem.log_likelihood(theta);
    if (ll <= kBadLogLike) {
        theta[3] = std::max(theta[3], 1e-3);
        ll = problem.log_likelihood(theta);
        if (ll <= kBadLogLike) return out;
    }

    const double tau_lo = bin_ps / 50.0, tau_hi = 1e6 * bin_ps;
    double ridge = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        problem.update_shape(theta[1]);
        problem.update_mu(theta);
        std::array<double, 4> g{};
        std::array<std::array<double, 4>, 4> info{};
        bool ok = true;
        for (std::size_t k = 0; k < m; ++k) {
            const double mu = problem.mu[k];
            if (mu <= 0.0) {
                ok = false;
                break;
            }
            const double r = counts[k] / mu - 1.0;
            const double shape = (1.0 - theta[2]) * problem.conv[k] + theta[2] * irf_density[k];
            const std::array<double, 4> dmu{shape, theta[0] * (1.0 - theta[2]) * problem.dconv[k],
                                            theta[0] * (irf_density[k] - problem.conv[k]), 1.0};
            for (int a = 0; a < 4; ++a) {
                g[a] += r * dmu[a];
                for (int b = 0; b < 4; ++b) info[a][b] += dmu[a] * dmu[b] / mu;
            }
        }
        if (!ok) break;

        double trace = 0.0;
        for (int a = 0; a < 4; ++a) trace += info[a][a];
        std::array<double, 4> step{};
        bool solved = false;
        for (int attempt = 0; attempt < 8 && !solved; ++attempt) {
            auto damped = info;
            for (int a = 0; a < 4; ++a)
                damped[a][a] += ridge * (info[a][a] + 1e-12 * trace) + 1e-14 * trace;
            step = g;
            solved = solve4(damped, step);
            if (!solved) ridge = std::max(ridge * 10.0, 1e-8);
        }
        if (!solved) break;

        const std::array<double, 4> scale{std::max(std::fabs(theta[0]), 1.0),
                                          std::max(std::fabs(theta[1]), bin_ps),
                                          std::max(std::fabs(theta[2]), 1e-3),
                                          std::max(std::fabs(theta[3]), 1e-6)};
        double alpha = 1.0;
        bool accepted = false;
        std::array<double, 4> trial = theta;
        double trial_ll = ll;
        const double ll_tol = 1e-12 * (1.0 + std::fabs(ll));
        for (int ls = 0; ls < 40; ++ls) {
            for (int a = 0; a < 4; ++a) trial[a] = theta[a] + alpha * step[a];
            if (trial[1] >= tau_lo && trial[1] <= tau_hi && trial[2] >= 0.0 &&
                trial[2] <= pf_max) {
                trial_ll = problem.log_likelihood(trial);
                if (trial_ll > ll - ll_tol && trial_ll > kBadLogLike) {
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!accepted) {
            double rel0 = 0.0;
            for (int a = 0; a < 4; ++a) rel0 = std::max(rel0, std::fabs(step[a]) / scale[a]);
            out.converged = rel0 < 1e-9;
            break;
        }
        double rel = 0.0;
        for (int a = 0; a < 4; ++a) rel = std::max(rel, std::fabs(alpha * step[a]) / scale[a]);
        theta = trial;
        ll = trial_ll;
        ridge *= 0.1;
        if (rel < 1e-9) {
            out.converged = true;
            break;
        }
    }

    // Expected information at the optimum for the error estimate; the
    // second-derivative terms vanish in expectation and the expected form is
    // positive by construction.
    problem.update_shape(theta[1]);
    problem.update_mu(theta);
    std::array<std::array<double, 4>, 4> info{};
    double deviance = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double mu = problem.mu[k];
        if (mu <= 0.0) return out;
        const double shape = (1.0 - theta[2]) * problem.conv[k] + theta[2] * irf_density[k];
        const std::array<double, 4> dmu{shape, theta[0] * (1.0 - theta[2]) * problem.dconv[k],
                                        theta[0] * (irf_density[k] - problem.conv[k]), 1.0};
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) info[a][b] += dmu[a] * dmu[b] / mu;
        deviance +=
            counts[k] > 0.0 ? counts[k] * std::log(counts[k] / mu) - (counts[k] - mu) : mu;
    }
    out.gof = 2.0 * deviance / std::max<std::size_t>(1, m - 4);

    double trace = 0.0;
    for (int a = 0; a < 4; ++a) trace += info[a][a];
    for (int a = 0; a < 4; ++a) info[a][a] += 1e-12 * trace;
    std::array<double, 4> e{0.0, 1.0, 0.0, 0.0};
    if (solve4(info, e) && e[1] > 0.0) out.tau_stat_ps = std::sqrt(e[1]);
    out.theta = theta;
    return out;
}

}  // namespace

ExtractionResult extract_lifetime(const TimeHistogram& data_folded,
                                  const TimeHistogram& irf_folded,
                                  const ExtractOptions& options) {
    ExtractionResult out;
    if (data_folded.bin_width_ps != irf_folded.bin_width_ps ||
        data_folded.n_bins() != irf_folded.n_bins())
        throw std::invalid_argument(
            "extract_lifetime: data and response must share bin width and period");

    const double bin = data_folded.bin_width_ps;
    const std::vector<double> irf_density = normalize_histogram(irf_folded);
    const std::vector<double> counts(data_folded.counts.begin(), data_folded.counts.end());

    out.data_scan = scan_start_time(data_folded, options.scan);

    struct Point {
        double offset, tau, sigma;
    };
    std::vector<Point> data_points;
    for (const auto& p : out.data_scan.points)
        if (p.fit.converged && p.fit.tau_stat_ps > 0.0)
            data_points.push_back({p.start_offset_ps, p.fit.tau_ps, p.fit.tau_stat_ps});
    if (data_points.size() < 3) {
        out.diagnostics = "data scan produced fewer than 3 converged points";
        return out;
    }

    // Plateau of the data scan seeds the template fit.
    const std::size_t plateau_begin = data_points.size() - data_points.size() / 3 - 1;
    double wsum = 0.0, twsum = 0.0;
    for (std::size_t i = plateau_begin; i < data_points.size(); ++i) {
        const double w = 1.0 / (data_points[i].sigma * data_points[i].sigma);
        wsum += w;
        twsum += w * data_points[i].tau;
    }
    const double tau_plateau = twsum / wsum;
    double b0 = 0.0;
    for (const auto& p : out.data_scan.points)
        if (std::fabs(p.start_offset_ps - data_points[plateau_begin].offset) < 1e-6 &&
            p.fit.converged)
            b0 = std::max(0.0, p.fit.background_level);

    // The lifetime comes from comparing the convolved model family with the
    // data over the full folded spectrum (Poisson likelihood).
    const auto reconvolution = fit_reconvolution(counts, irf_density, bin, tau_plateau, 0.02, b0,
                                                 options.prompt_fraction_max);
    if (!reconvolution.converged) {
        out.diagnostics = "reconvolution fit did not converge";
        return out;
    }
    const double tau = reconvolution.theta[1];
    const double prompt_fraction = reconvolution.theta[2];
    const double stat_error = reconvolution.tau_stat_ps;

    // The matched template is fit in the same manner as the data; the
    // residual spread between the two scan curves, measured against the
    // per-point errors and converted through the fit's tau sensitivity,
    // is the systematic error of the comparison.
    double total = 0.0;
    for (double v : counts) total += v;
    const DecayTemplate tpl = build_template(irf_density, bin, tau, prompt_fraction,
                                             reconvolution.theta[3], total);
    ScanConfig template_scan_config = options.scan;
    template_scan_config.hints.single_start = true;
    template_scan_config.hints.tau_start_ps = tau;
    out.template_scan = scan_start_time_values(tpl.values, bin, template_scan_config);

    double chi2 = 0.0, rss = 0.0;
    int matched = 0;
    for (const auto& tp : out.template_scan.points) {
        if (!tp.fit.converged) continue;
        for (const auto& dp : data_points) {
            if (std::fabs(dp.offset - tp.start_offset_ps) > 1e-6) continue;
            const double r = dp.tau - tp.fit.tau_ps;
            rss += r * r;
            chi2 += (r / dp.sigma) * (r / dp.sigma);
            ++matched;
            break;
        }
    }
    if (matched < 3) {
        out.diagnostics = "fewer than 3 scan points available for the template comparison";
        return out;
    }
    const int ndf = std::max(1, matched - 2);
    const double chi2_ndf = chi2 / ndf;
    const double sys_error = std::sqrt(chi2_ndf) * stat_error;

    out.prompt_fraction = prompt_fraction;
    out.match_chi2_ndf = chi2_ndf;
    out.n_matched_points = matched;
    out.scan_residual_rms_ps = std::sqrt(rss / matched);
    out.result.trap_label = data_folded.metadata.count("trap_label")
                                ? data_folded.metadata.at("trap_label")
                                : "";
    out.result.tau_ps = tau;
    out.result.stat_error_ps = stat_error;
    out.result.sys_error_ps = sys_error;
    out.result.final_error_ps = std::hypot(stat_error, sys_error);
    out.result.combine_rule = "quadrature";
    out.success = chi2_ndf < options.match_chi2_ndf_limit;
    if (!out.success)
        out.diagnostics = "no (tau, prompt_fraction) reached scan-residual chi2/ndf < " +
                          std::to_string(options.match_chi2_ndf_limit);
    return out;
}

LifetimeResult combine_measurements(const std::vector<LifetimeResult>& results, bool common_sys) {
    if (results.empty())
        throw std::invalid_argument("combine_measurements: at least one result required");
    double wsum = 0.0, twsum = 0.0;
    for (const auto& r : results) {
        if (!(r.stat_error_ps > 0.0))
            throw std::invalid_argument(
                "combine_measurements: statistical errors must be positive");
        const double w = 1.0 / (r.stat_error_ps * r.stat_error_ps);
        wsum += w;
        twsum += w * r.tau_ps;
    }

    LifetimeResult combined;
    combined.tau_ps = twsum / wsum;
    combined.stat_error_ps = std::sqrt(1.0 / wsum);
    if (common_sys) {
        double s = 0.0;
        for (const auto& r : results)
            s += r.sys_error_ps / (r.stat_error_ps * r.stat_error_ps);
        combined.sys_error_ps = s / wsum;
    } else {
        double s2 = 0.0;
        for (const auto& r : results) {
            const double w = 1.0 / (r.stat_error_ps * r.stat_error_ps);
            s2 += w * w * r.sys_error_ps * r.sys_error_ps;
        }
        combined.sys_error_ps = std::sqrt(s2) / wsum;
    }
    combined.final_error_ps = std::hypot(combined.stat_error_ps, combined.sys_error_ps);
    combined.combine_rule = "quadrature";
    for (std::size_t i = 0; i < results.size(); ++i)
        combined.trap_label += (i ? "+" : "") + results[i].trap_label;
    return combined;
}

}  // namespace tcspc
