// Command-line front end: simulate, measure-irf, fit, scan, pullstudy,
// combine, report. Exit codes: 0 success, 2 validation error, 3 fit or
// extraction failure, 4 I/O error.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "tcspc/analysis/decay_fit.hpp"
#include "tcspc/analysis/extract.hpp"
#include "tcspc/analysis/folding.hpp"
#include "tcspc/analysis/precision.hpp"
#include "tcspc/analysis/reconvolution.hpp"
#include "tcspc/analysis/scan.hpp"
#include "tcspc/io/config_io.hpp"
#include "tcspc/io/event_io.hpp"
#include "tcspc/io/histogram_io.hpp"
#include "tcspc/io/io_error.hpp"
#include "tcspc/io/report.hpp"
#include "tcspc/sim/experiment.hpp"
#include "tcspc/sim/rng.hpp"

#ifndef TCSPC_VERSION
#define TCSPC_VERSION "0.0.0"
#endif

namespace {

using namespace tcspc;

constexpr int kExitValidation = 2;
constexpr int kExitFitFailure = 3;
constexpr int kExitIo = 4;

std::string now_iso8601() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm_utc{};
    gmtime_r(&now, &tm_utc);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
    return buf;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
    std::uint64_t state = base ^ salt;
    return detail::splitmix64(state);
}

struct ConfigSource {
    std::string config_path;
    std::string preset;
    std::string manifest_path;

    ExperimentConfig load() const {
        if (!manifest_path.empty()) return read_manifest(manifest_path).config;
        if (!preset.empty()) return load_config(preset_path(preset));
        if (!config_path.empty()) return load_config(config_path);
        throw std::invalid_argument("one of --config, --preset or --manifest is required");
    }

    void attach(CLI::App* cmd, bool with_manifest = false) {
        cmd->add_option("--config", config_path, "experiment config file");
        cmd->add_option("--preset", preset, "built-in preset name (see presets/)");
        if (with_manifest)
            cmd->add_option("--manifest", manifest_path, "re-run a recorded manifest");
    }
};

// The response measurement turns the scatterer up to at least this per-pulse
// probability so echo bins are populated well above shot noise.
constexpr double kIrfMeasurePromptProb = 2e-4;

int cmd_simulate(const ConfigSource& source, const std::string& out_dir, unsigned workers,
                 bool blind, std::optional<std::uint64_t> seed,
                 std::optional<double> duration_s) {
    ExperimentConfig config = source.load();
    if (seed) config.seed = *seed;
    if (duration_s) config.duration_s = *duration_s;

    const auto t0 = std::chrono::steady_clock::now();
    const auto events = run_experiment(config, workers);
    auto folded = fold_events(config, events);

    ExperimentConfig irf_config = config;
    irf_config.prompt_scatter_prob = std::max(config.prompt_scatter_prob, kIrfMeasurePromptProb);
    irf_config.seed = derive_seed(config.seed, 0x49524655ULL);
    auto irf_hist = simulate_irf_measurement(irf_config, workers);

    folded.metadata["trap_label"] = config.trap_label;
    folded.metadata["transition"] = config.transition.label;
    irf_hist.metadata["trap_label"] = config.trap_label;

    const std::string events_path = out_dir + "/events.csv";
    const std::string folded_path = out_dir + "/folded.hist";
    const std::string irf_path = out_dir + "/irf_measured.hist";
    write_events(events_path, events, !blind);
    write_histogram(folded_path, folded);
    write_histogram(irf_path, irf_hist);

    RunManifest manifest;
    manifest.code_version = TCSPC_VERSION;
    manifest.created_at = now_iso8601();
    manifest.seed = config.seed;
    manifest.outputs = {{"events", events_path}, {"folded", folded_path}, {"irf", irf_path}};
    manifest.config = config;
    write_manifest(out_dir + "/run_manifest.txt", manifest);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::int64_t n_decay = 0, n_prompt = 0, n_background = 0;
    for (const auto& ev : events) {
        n_decay += ev.kind == EventKind::decay;
        n_prompt += ev.kind == EventKind::prompt;
        n_background += ev.kind == EventKind::background;
    }
    const double expected_decay = expected_decay_rate_hz(config);
    const double expected_total = expected_event_rate_hz(config);
    std::cout << "simulated " << config.duration_s << " s (" << cycle_count(config)
              << " cycles) in " << elapsed << " s wall\n";
    std::cout << "events: " << events.size() << " total = " << n_decay << " decay + " << n_prompt
              << " prompt + " << n_background << " background\n";
    std::cout << "decay rate: " << static_cast<double>(n_decay) / config.duration_s
              << " /s (expected " << expected_decay << " /s)\n";
    std::cout << "total rate: " << static_cast<double>(events.size()) / config.duration_s
              << " /s (expected " << expected_total << " /s)\n";
    std::cout << "wrote " << events_path << ", " << folded_path << ", " << irf_path << "\n";
    if (events.empty())
        std::cout << "warning: configured rates produced an empty event stream\n";
    return 0;
}

int cmd_measure_irf(const ConfigSource& source, const std::string& out_path, unsigned workers,
                    std::optional<std::uint64_t> seed, std::optional<double> duration_s,
                    std::optional<double> prompt_prob) {
    ExperimentConfig config = source.load();
    if (seed) config.seed = *seed;
    if (duration_s) config.duration_s = *duration_s;
    config.prompt_scatter_prob =
        prompt_prob ? *prompt_prob : std::max(config.prompt_scatter_prob, kIrfMeasurePromptProb);
    auto irf = simulate_irf_measurement(config, workers);
    irf.metadata["trap_label"] = config.trap_label;
    write_histogram(out_path, irf);
    std::cout << "response measurement: " << irf.total() << " counts over " << config.duration_s
              << " s -> " << out_path << "\n";
    return 0;
}

ScanConfig scan_config_from(double step_ns, double max_ns, double end_ns,
                            const std::string& model) {
    ScanConfig scan;
    scan.step_ps = step_ns * 1e3;
    scan.max_offset_ps = max_ns * 1e3;
    scan.end_offset_ps = end_ns > 0.0 ? end_ns * 1e3 : 0.0;
    scan.model = model == "bare" ? DecayModel::bare_exponential : DecayModel::wrapped_exponential;
    return scan;
}

int cmd_fit(const std::vector<std::string>& data_paths, const std::vector<std::string>& irf_paths,
            const std::string& out_dir, double step_ns, double max_ns, double end_ns,
            const std::string& model, const std::string& format) {
    if (irf_paths.size() != data_paths.size())
        throw std::invalid_argument("one --irf is required per --data");

    ExtractOptions options;
    options.scan = scan_config_from(step_ns, max_ns, end_ns, model);

    std::vector<LifetimeResult> results;
    bool any_failed = false;
    for (std::size_t i = 0; i < data_paths.size(); ++i) {
        const auto raw_data = read_histogram(data_paths[i]);
        const auto raw_irf = read_histogram(irf_paths[i]);
        if (!raw_data.metadata.count("fold_period_ps") ||
            !raw_irf.metadata.count("fold_period_ps"))
            throw std::invalid_argument(
                "fit expects folded histograms (fold_period_ps metadata missing)");
        const auto background = background_estimate_default(raw_data);
        const auto extraction = extract_lifetime(raw_data, raw_irf, options);

        FitReport report;
        report.data_path = data_paths[i];
        report.irf_path = irf_paths[i];
        report.scan_step_ps = options.scan.step_ps;
        report.scan_max_offset_ps = options.scan.max_offset_ps;
        report.scan_end_offset_ps = options.scan.resolved_end_ps(raw_data.span_ps());
        report.background = background;
        report.extraction = extraction;
        report.data_total = raw_data.total();
        report.exposure_s = raw_data.exposure_s;

        const std::string tag = data_paths.size() > 1 ? "_" + std::to_string(i) : "";
        {
            std::ofstream out(out_dir + "/report" + tag + ".txt", std::ios::binary);
            if (!out) throw IoError("cannot open report file in '" + out_dir + "'");
            render_fit_report(out, report);
        }
        render_fit_report(std::cout, report);
        std::cout << "\n";

        const auto irf_density = normalize_histogram(raw_irf);
        const auto model_template =
            build_template(irf_density, raw_data.bin_width_ps, extraction.result.tau_ps,
                           extraction.prompt_fraction, background.level,
                           static_cast<double>(raw_data.total()));
        write_scan_csv(out_dir + "/scan_curve" + tag + ".csv", extraction.data_scan,
                       extraction.template_scan);
        write_decay_csv(out_dir + "/decay_curve" + tag + ".csv", raw_data, model_template);
        write_residuals_csv(out_dir + "/residuals" + tag + ".csv", raw_data, model_template);
        write_result_file(out_dir + "/lifetime_result" + tag + ".txt", extraction.result);

        results.push_back(extraction.result);
        any_failed = any_failed || !extraction.success;
    }

    std::optional<LifetimeResult> combined;
    if (results.size() > 1 && !any_failed) {
        combined = combine_measurements(results, true);
        write_result_file(out_dir + "/lifetime_combined.txt", *combined);
    }
    render_result_table(std::cout, results, combined, format == "csv");
    return any_failed ? kExitFitFailure : 0;
}

int cmd_scan(const std::string& data_path, const std::string& out_path, double step_ns,
             double max_ns, double end_ns, const std::string& model) {
    const auto data = read_histogram(data_path);
    const auto scan = scan_start_time(data, scan_config_from(step_ns, max_ns, end_ns, model));
    write_scan_csv(out_path, scan, StartTimeScan{});
    std::cout << "start_ns  tau_ns    stat_ns   gof\n";
    for (const auto& p : scan.points) {
        std::cout << p.start_offset_ps * 1e-3 << "  ";
        if (p.fit.converged)
            std::cout << p.fit.tau_ps * 1e-3 << "  " << p.fit.tau_stat_ps * 1e-3 << "  "
                      << p.fit.gof << "\n";
        else
            std::cout << "(not converged)\n";
    }
    std::cout << "max deviation: " << scan.max_deviation_sigma() << " combined sigma\n";
    std::cout << "relative variation: " << scan.relative_variation() << "\n";
    return 0;
}

int cmd_pullstudy(const ConfigSource& source, int repeats, const std::string& out_dir,
                  unsigned workers, std::optional<std::uint64_t> seed, double fit_start_ns) {
    if (repeats < 2) throw std::invalid_argument("--repeats must be at least 2");
    ExperimentConfig config = source.load();
    if (seed) config.seed = *seed;
    const double tau_true = config.transition.lifetime_ps();
    const double period = config.train.pulse_spacing_ps;

    std::ofstream csv(out_dir + "/pulls.csv", std::ios::binary);
    if (!csv) throw IoError("cannot open '" + out_dir + "/pulls.csv' for writing");
    csv << "repeat,seed,tau_ns,tau_stat_ns,pull,converged\n";

    double sum_tau = 0.0, sum_tau2 = 0.0, sum_z = 0.0, sum_z2 = 0.0;
    int n_ok = 0;
    for (int rep = 0; rep < repeats; ++rep) {
        ExperimentConfig run = config;
        run.seed = derive_seed(config.seed, static_cast<std::uint64_t>(rep) + 1);
        const auto events = run_experiment(run, workers);
        const auto folded = fold_events(run, events);
        const auto fit =
            fit_decay(folded, {fit_start_ns * 1e3, period}, DecayModel::wrapped_exponential,
                      config.background_rate_hz > 0.0, 0.0);
        const double pull =
            fit.tau_stat_ps > 0.0 ? (fit.tau_ps - tau_true) / fit.tau_stat_ps : 0.0;
        csv << rep << ',' << run.seed << ',' << format_double(fit.tau_ps * 1e-3) << ','
            << format_double(fit.tau_stat_ps * 1e-3) << ',' << format_double(pull) << ','
            << (fit.converged ? 1 : 0) << "\n";
        if (fit.converged) {
            sum_tau += fit.tau_ps;
            sum_tau2 += fit.tau_ps * fit.tau_ps;
            sum_z += pull;
            sum_z2 += pull * pull;
            ++n_ok;
        }
    }
    if (n_ok < 2) throw std::invalid_argument("pullstudy: fewer than 2 converged fits");

    const double mean_tau = sum_tau / n_ok;
    const double spread = std::sqrt(std::max(0.0, sum_tau2 / n_ok - mean_tau * mean_tau));
    const double mean_z = sum_z / n_ok;
    const double width = std::sqrt(std::max(0.0, sum_z2 / n_ok - mean_z * mean_z));
    const double predicted = predict_statistical_precision(
        expected_decay_rate_hz(config), config.duration_s, tau_true, period);

    std::ofstream summary(out_dir + "/pull_summary.txt", std::ios::binary);
    summary << "repeats = " << repeats << "\n";
    summary << "converged = " << n_ok << "\n";
    summary << "mean_tau_ns = " << format_double(mean_tau * 1e-3) << "\n";
    summary << "relative_spread = " << format_double(spread / mean_tau) << "\n";
    summary << "mean_pull = " << format_double(mean_z) << "\n";
    summary << "pull_width = " << format_double(width) << "\n";
    summary << "predicted_relative_precision = " << format_double(predicted) << "\n";

    std::cout << "pull study: " << n_ok << "/" << repeats << " converged\n";
    std::cout << "mean tau: " << mean_tau * 1e-3 << " ns (truth " << tau_true * 1e-3 << ")\n";
    std::cout << "relative spread: " << spread / mean_tau << "\n";
    std::cout << "mean pull: " << mean_z << "  pull width: " << width << "\n";
    std::cout << "predicted relative precision: " << predicted << "\n";
    return 0;
}

int cmd_combine(const std::vector<std::string>& inputs, const std::string& out_path,
                bool independent_sys) {
    std::vector<LifetimeResult> results;
    for (const auto& path : inputs) results.push_back(read_result_file(path));
    const auto combined = combine_measurements(results, !independent_sys);
    if (!out_path.empty()) write_result_file(out_path, combined);
    render_result_table(std::cout, results, combined, false);
    return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& combined_path,
               const std::string& format) {
    std::vector<LifetimeResult> rows;
    for (const auto& path : inputs) rows.push_back(read_result_file(path));
    std::optional<LifetimeResult> combined;
    if (!combined_path.empty()) combined = read_result_file(combined_path);
    render_result_table(std::cout, rows, combined, format == "csv");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-ion TCSPC lifetime simulator and analysis"};
    app.set_version_flag("--version", TCSPC_VERSION);
    app.require_subcommand(1);

    auto* simulate = app.add_subcommand("simulate", "generate an event stream and histograms");
    ConfigSource sim_source;
    sim_source.attach(simulate, true);
    std::string sim_out = ".";
    unsigned sim_workers = 1;
    bool sim_blind = false;
    std::optional<std::uint64_t> sim_seed;
    std::optional<double> sim_duration;
    simulate->add_option("--out-dir", sim_out, "output directory");
    simulate->add_option("--workers", sim_workers, "worker threads");
    simulate->add_flag("--blind", sim_blind, "suppress truth tags in the event file");
    simulate->add_option("--seed", sim_seed, "override the config seed");
    simulate->add_option("--duration", sim_duration, "override duration_s");

    auto* measure = app.add_subcommand("measure-irf", "prompt-only response measurement");
    ConfigSource irf_source;
    irf_source.attach(measure);
    std::string irf_out = "irf_measured.hist";
    unsigned irf_workers = 1;
    std::optional<std::uint64_t> irf_seed;
    std::optional<double> irf_duration;
    std::optional<double> irf_prompt;
    measure->add_option("--out", irf_out, "output histogram path");
    measure->add_option("--workers", irf_workers, "worker threads");
    measure->add_option("--seed", irf_seed, "override the config seed");
    measure->add_option("--duration", irf_duration, "override duration_s");
    measure->add_option("--prompt-prob", irf_prompt, "per-pulse scatter probability");

    auto* fit = app.add_subcommand("fit", "extract lifetimes from folded histograms");
    std::vector<std::string> fit_data, fit_irf;
    std::string fit_out = ".";
    std::string fit_model = "wrapped";
    std::string fit_format = "text";
    double fit_step_ns = 0.5, fit_max_ns = 6.0, fit_end_ns = 0.0;
    fit->add_option("--data", fit_data, "folded data histogram (repeatable)")->required();
    fit->add_option("--irf", fit_irf, "folded response histogram (repeatable)")->required();
    fit->add_option("--out-dir", fit_out, "output directory");
    fit->add_option("--scan-step", fit_step_ns, "scan step in ns");
    fit->add_option("--scan-max", fit_max_ns, "last scan offset in ns");
    fit->add_option("--scan-end", fit_end_ns, "fit window end in ns (0 = auto)");
    fit->add_option("--model", fit_model)->check(CLI::IsMember({"wrapped", "bare"}));
    fit->add_option("--format", fit_format)->check(CLI::IsMember({"text", "csv"}));

    auto* scan = app.add_subcommand("scan", "start-time scan of a folded histogram");
    std::string scan_data, scan_out = "scan_curve.csv";
    std::string scan_model = "wrapped";
    double scan_step_ns = 0.5, scan_max_ns = 6.0, scan_end_ns = 0.0;
    scan->add_option("--data", scan_data)->required();
    scan->add_option("--out", scan_out, "output CSV path");
    scan->add_option("--scan-step", scan_step_ns, "scan step in ns");
    scan->add_option("--scan-max", scan_max_ns, "last scan offset in ns");
    scan->add_option("--scan-end", scan_end_ns, "fit window end in ns (0 = auto)");
    scan->add_option("--model", scan_model)->check(CLI::IsMember({"wrapped", "bare"}));

    auto* pull = app.add_subcommand("pullstudy", "repeated simulate+fit calibration");
    ConfigSource pull_source;
    pull_source.attach(pull);
    int pull_repeats = 0;
    std::string pull_out = ".";
    unsigned pull_workers = 1;
    std::optional<std::uint64_t> pull_seed;
    double pull_fit_start_ns = 0.0;
    pull->add_option("--repeats", pull_repeats, "number of repetitions")->required();
    pull->add_option("--out-dir", pull_out, "output directory");
    pull->add_option("--workers", pull_workers, "worker threads");
    pull->add_option("--seed", pull_seed, "override the master seed");
    pull->add_option("--fit-start", pull_fit_start_ns, "fit window start in ns");

    auto* combine = app.add_subcommand("combine", "weighted average of lifetime results");
    std::vector<std::string> combine_in;
    std::string combine_out;
    bool combine_indep = false;
    combine->add_option("--in", combine_in, "lifetime result file (repeatable)")->required();
    combine->add_option("--out", combine_out, "combined result file");
    combine->add_flag("--independent-sys", combine_indep,
                      "systematics are independent rather than common");

    auto* report = app.add_subcommand("report", "render a result table");
    std::vector<std::string> report_in;
    std::string report_combined;
    std::string report_format = "text";
    report->add_option("--in", report_in, "lifetime result file (repeatable)")->required();
    report->add_option("--combined", report_combined, "combined result file");
    report->add_option("--format", report_format)->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (simulate->parsed())
            return cmd_simulate(sim_source, sim_out, sim_workers, sim_blind, sim_seed,
                                sim_duration);
        if (measure->parsed())
            return cmd_measure_irf(irf_source, irf_out, irf_workers, irf_seed, irf_duration,
                                   irf_prompt);
        if (fit->parsed())
            return cmd_fit(fit_data, fit_irf, fit_out, fit_step_ns, fit_max_ns, fit_end_ns,
                           fit_model, fit_format);
        if (scan->parsed())
            return cmd_scan(scan_data, scan_out, scan_step_ns, scan_max_ns, scan_end_ns,
                            scan_model);
        if (pull->parsed())
            return cmd_pullstudy(pull_source, pull_repeats, pull_out, pull_workers, pull_seed,
                                 pull_fit_start_ns);
        if (combine->parsed()) return cmd_combine(combine_in, combine_out, combine_indep);
        if (report->parsed()) return cmd_report(report_in, report_combined, report_format);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
