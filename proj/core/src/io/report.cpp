#include "tcspc/io/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "tcspc/io/config_io.hpp"
#include "tcspc/io/histogram_io.hpp"
#include "tcspc/io/io_error.hpp"

namespace tcspc {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::string ns(double ps) { return format_double(ps * 1e-3); }

}  // namespace

void write_manifest(const std::string& path, const RunManifest& manifest) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# tcspc run manifest v1\n";
    out << "code_version = " << manifest.code_version << "\n";
    out << "created_at = " << manifest.created_at << "\n";
    out << "seed = " << manifest.seed << "\n";
    for (const auto& [name, file] : manifest.outputs)
        out << "output." << name << " = " << file << "\n";
    out << "[config]\n";
    out << dump_config(manifest.config);
    if (!out) throw IoError("write failed for '" + path + "'");
}

RunManifest read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    RunManifest manifest;
    std::string line;
    std::ostringstream config_text;
    bool in_config = false;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (in_config) {
            config_text << line << "\n";
            continue;
        }
        if (t.empty() || t.front() == '#') continue;
        if (t == "[config]") {
            in_config = true;
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (key == "code_version")
            manifest.code_version = value;
        else if (key == "created_at")
            manifest.created_at = value;
        else if (key == "seed")
            manifest.seed = std::stoull(value);
        else if (key.rfind("output.", 0) == 0)
            manifest.outputs[key.substr(7)] = value;
    }
    if (!in_config) throw std::invalid_argument(path + ": missing [config] section");
    manifest.config = parse_config(config_text.str(), path + " [config]");
    return manifest;
}

void write_result_file(const std::string& path, const LifetimeResult& result) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "# tcspc lifetime result v1\n";
    out << "trap_label = " << result.trap_label << "\n";
    out << "tau_ns = " << ns(result.tau_ps) << "\n";
    out << "stat_error_ns = " << ns(result.stat_error_ps) << "\n";
    out << "sys_error_ns = " << ns(result.sys_error_ps) << "\n";
    out << "final_error_ns = " << ns(result.final_error_ps) << "\n";
    out << "combine_rule = " << result.combine_rule << "\n";
    if (!out) throw IoError("write failed for '" + path + "'");
}

LifetimeResult read_result_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    LifetimeResult result;
    std::string line;
    std::size_t line_no = 0;
    bool have_tau = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        try {
            if (key == "trap_label")
                result.trap_label = value;
            else if (key == "tau_ns") {
                result.tau_ps = std::stod(value) * 1e3;
                have_tau = true;
            } else if (key == "stat_error_ns")
                result.stat_error_ps = std::stod(value) * 1e3;
            else if (key == "sys_error_ns")
                result.sys_error_ps = std::stod(value) * 1e3;
            else if (key == "final_error_ns")
                result.final_error_ps = std::stod(value) * 1e3;
            else if (key == "combine_rule")
                result.combine_rule = value;
            else
                throw std::invalid_argument("unknown key '" + key + "'");
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_tau) throw std::invalid_argument(path + ": missing tau_ns");
    return result;
}

void render_fit_report(std::ostream& out, const FitReport& report) {
    const auto& ex = report.extraction;
    out << "tcspc fit report\n";
    out << "================\n";
    out << "data:            " << report.data_path << "\n";
    out << "response:        " << report.irf_path << "\n";
    out << "total counts:    " << report.data_total << "\n";
    out << "exposure_s:      " << format_double(report.exposure_s) << "\n";
    out << "scan step_ns:    " << ns(report.scan_step_ps)
        << "   max_offset_ns: " << ns(report.scan_max_offset_ps)
        << "   end_offset_ns: " << ns(report.scan_end_offset_ps) << "\n";
    out << "background/bin:  " << format_double(report.background.level) << " +- "
        << format_double(report.background.level_error);
    if (!report.background.warning.empty()) out << "   [" << report.background.warning << "]";
    out << "\n\n";

    out << "start-time scan (data vs matched template)\n";
    out << "start_ns   tau_ns      stat_ns    gof      template_tau_ns\n";
    for (const auto& p : ex.data_scan.points) {
        out << std::left << std::setw(11) << ns(p.start_offset_ps);
        if (p.fit.converged) {
            out << std::setw(12) << ns(p.fit.tau_ps) << std::setw(11) << ns(p.fit.tau_stat_ps)
                << std::setw(9) << format_double(p.fit.gof);
        } else {
            out << std::setw(32) << "(not converged)";
        }
        for (const auto& tp : ex.template_scan.points)
            if (tp.start_offset_ps == p.start_offset_ps && tp.fit.converged)
                out << ns(tp.fit.tau_ps);
        out << "\n";
    }
    out << "\nscan flatness:   max deviation " << format_double(ex.data_scan.max_deviation_sigma())
        << " combined sigma; relative variation "
        << format_double(ex.data_scan.relative_variation()) << "\n";
    out << "\nextraction\n";
    out << "tau_ns:          " << ns(ex.result.tau_ps) << "\n";
    out << "stat_error_ns:   " << ns(ex.result.stat_error_ps) << "\n";
    out << "sys_error_ns:    " << ns(ex.result.sys_error_ps) << "\n";
    out << "final_error_ns:  " << ns(ex.result.final_error_ps) << " (" << ex.result.combine_rule
        << ")\n";
    out << "prompt_fraction: " << format_double(ex.prompt_fraction) << "\n";
    out << "match chi2/ndf:  " << format_double(ex.match_chi2_ndf) << " over "
        << ex.n_matched_points << " points\n";
    out << "status:          " << (ex.success ? "ok" : ("FAILED: " + ex.diagnostics)) << "\n";
}

void write_scan_csv(const std::string& path, const StartTimeScan& data_scan,
                    const StartTimeScan& template_scan) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "start_offset_ns,tau_ns,tau_stat_ns,gof,converged,template_tau_ns\n";
    for (const auto& p : data_scan.points) {
        out << ns(p.start_offset_ps) << ',' << ns(p.fit.tau_ps) << ',' << ns(p.fit.tau_stat_ps)
            << ',' << format_double(p.fit.gof) << ',' << (p.fit.converged ? 1 : 0) << ',';
        for (const auto& tp : template_scan.points)
            if (tp.start_offset_ps == p.start_offset_ps && tp.fit.converged)
                out << ns(tp.fit.tau_ps);
        out << "\n";
    }
}

void write_decay_csv(const std::string& path, const TimeHistogram& folded,
                     const DecayTemplate& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "bin_start_ps,counts,model\n";
    for (std::size_t i = 0; i < folded.counts.size(); ++i) {
        out << format_double(folded.bin_start_ps(i)) << ',' << folded.counts[i] << ',';
        if (i < model.values.size()) out << format_double(model.values[i]);
        out << "\n";
    }
}

void write_residuals_csv(const std::string& path, const TimeHistogram& folded,
                         const DecayTemplate& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << "bin_start_ps,residual_pull\n";
    for (std::size_t i = 0; i < folded.counts.size() && i < model.values.size(); ++i) {
        const double mu = model.values[i];
        const double pull =
            mu > 0.0 ? (static_cast<double>(folded.counts[i]) - mu) / std::sqrt(mu) : 0.0;
        out << format_double(folded.bin_start_ps(i)) << ',' << format_double(pull) << "\n";
    }
}

void render_result_table(std::ostream& out, const std::vector<LifetimeResult>& rows,
                         const std::optional<LifetimeResult>& combined, bool csv) {
    if (csv) {
        out << "trap,tau_ns,stat_error_ns,sys_error_ns,final_error_ns\n";
        for (const auto& r : rows)
            out << r.trap_label << ',' << ns(r.tau_ps) << ',' << ns(r.stat_error_ps) << ','
                << ns(r.sys_error_ps) << ',' << ns(r.final_error_ps) << "\n";
        if (combined)
            out << "final," << ns(combined->tau_ps) << ',' << ns(combined->stat_error_ps) << ','
                << ns(combined->sys_error_ps) << ',' << ns(combined->final_error_ps) << "\n";
        return;
    }
    out << "lifetime measurement results (ns)\n";
    out << std::left << std::setw(18) << "trap" << std::setw(12) << "tau" << std::setw(14)
        << "statistical" << std::setw(13) << "systematic" << "final\n";
    auto row = [&](const LifetimeResult& r, const char* name) {
        std::ostringstream tau, stat, sys, fin;
        tau << std::fixed << std::setprecision(3) << r.tau_ps * 1e-3;
        stat << std::fixed << std::setprecision(3) << r.stat_error_ps * 1e-3;
        sys << std::fixed << std::setprecision(3) << r.sys_error_ps * 1e-3;
        fin << std::fixed << std::setprecision(3) << r.final_error_ps * 1e-3;
        out << std::left << std::setw(18) << name << std::setw(12) << tau.str() << std::setw(14)
            << stat.str() << std::setw(13) << sys.str() << fin.str() << "\n";
    };
    for (const auto& r : rows) row(r, r.trap_label.empty() ? "(unnamed)" : r.trap_label.c_str());
    if (combined) {
        out << std::string(60, '-') << "\n";
        std::ostringstream tau, err;
        tau << std::fixed << std::setprecision(3) << combined->tau_ps * 1e-3;
        err << std::fixed << std::setprecision(3) << combined->final_error_ps * 1e-3;
        out << std::left << std::setw(18) << "final" << tau.str() << " +- " << err.str() << "\n";
    }
}

}  // namespace tcspc
