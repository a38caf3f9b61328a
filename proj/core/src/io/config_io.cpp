#include "tcspc/io/config_io.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "tcspc/io/histogram_io.hpp"
#include "tcspc/io/io_error.hpp"

#ifndef TCSPC_PRESET_DIR
#define TCSPC_PRESET_DIR "presets"
#endif

namespace tcspc {

namespace {

const std::set<std::string> kOptionalKeys = {
    "irf_type",        "irf_rise_sigma_ps",    "irf_tail_ns",
    "irf_echo_delays_ns", "irf_echo_amplitudes", "irf_file",
    "beats_enabled",   "beat_amplitude",       "beat_frequency_rad_per_s",
    "beat_phase_rad",  "trap_label",           "irf_transit_delay_ns",
    "irf_measurement_shift_ps", "irf_measurement_rise_scale",
};

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": cannot parse '" + value + "' as a number");
    }
    if (used != value.size())
        throw std::invalid_argument(key + ": trailing characters in '" + value + "'");
    return parsed;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const std::uint64_t parsed = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        return parsed;
    } catch (const std::exception&) {
        throw std::invalid_argument(key + ": cannot parse '" + value + "' as an integer");
    }
}

std::vector<double> to_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::istringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        out.push_back(to_double(key, t));
    }
    return out;
}

}  // namespace

const std::vector<std::string>& required_config_keys() {
    static const std::vector<std::string> keys = {
        "transition_label",  "lifetime_true_ns",    "wavelength_nm",
        "pulse_energy_pj",   "pulse_duration_ps",   "beam_waist_um",
        "pulses_per_cycle",  "pulse_spacing_ns",    "cooling_window_ns",
        "cycle_rate_hz",     "tdc_bin_width_ps",    "tdc_jitter_sigma_ps",
        "tdc_scale_error_ppm", "tdc_inl_rms_ps",    "tdc_inl_seed",
        "detection_efficiency", "prompt_scatter_prob", "background_rate_hz",
        "duration_s",        "seed",
    };
    return keys;
}

ExperimentConfig parse_config(const std::string& text, const std::string& context) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(context + ":" + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key = trim(t.substr(0, eq));
        const std::string value = trim(t.substr(eq + 1));
        if (kv.count(key))
            throw std::invalid_argument(context + ": duplicate key '" + key + "'");
        kv[key] = value;
    }

    std::vector<std::string> missing;
    for (const auto& key : required_config_keys())
        if (!kv.count(key)) missing.push_back(key);
    if (!missing.empty()) {
        std::string message = context + ": missing required keys:";
        for (const auto& k : missing) message += " " + k;
        throw std::invalid_argument(message);
    }
    for (const auto& [key, value] : kv) {
        (void)value;
        bool known = kOptionalKeys.count(key) > 0;
        for (const auto& r : required_config_keys()) known = known || r == key;
        if (!known) throw std::invalid_argument(context + ": unknown key '" + key + "'");
    }

    ExperimentConfig config;
    config.transition.label = kv.at("transition_label");
    if (config.transition.label != "P1/2" && config.transition.label != "P3/2")
        throw std::invalid_argument("transition_label: must be 'P1/2' or 'P3/2'");
    config.transition.lifetime_ns = to_double("lifetime_true_ns", kv.at("lifetime_true_ns"));
    config.transition.wavelength_nm = to_double("wavelength_nm", kv.at("wavelength_nm"));
    config.pulse.energy_pj = to_double("pulse_energy_pj", kv.at("pulse_energy_pj"));
    config.pulse.duration_ps = to_double("pulse_duration_ps", kv.at("pulse_duration_ps"));
    config.pulse.waist_um = to_double("beam_waist_um", kv.at("beam_waist_um"));
    config.train.pulses_per_cycle =
        static_cast<std::uint32_t>(to_u64("pulses_per_cycle", kv.at("pulses_per_cycle")));
    config.train.pulse_spacing_ps = to_double("pulse_spacing_ns", kv.at("pulse_spacing_ns")) * 1e3;
    config.train.cooling_window_ps =
        to_double("cooling_window_ns", kv.at("cooling_window_ns")) * 1e3;
    config.train.cycle_rate_hz = to_double("cycle_rate_hz", kv.at("cycle_rate_hz"));

    const std::string irf_type = kv.count("irf_type") ? kv.at("irf_type") : "parametric";
    if (irf_type == "parametric") {
        ParametricIrf irf;
        irf.transit_delay_ps = kv.count("irf_transit_delay_ns")
                                   ? to_double("irf_transit_delay_ns", kv.at("irf_transit_delay_ns")) * 1e3
                                   : 0.0;
        irf.rise_sigma_ps =
            kv.count("irf_rise_sigma_ps") ? to_double("irf_rise_sigma_ps", kv.at("irf_rise_sigma_ps")) : 0.0;
        irf.tail_ps = kv.count("irf_tail_ns") ? to_double("irf_tail_ns", kv.at("irf_tail_ns")) * 1e3 : 0.0;
        const auto delays =
            kv.count("irf_echo_delays_ns") ? to_list("irf_echo_delays_ns", kv.at("irf_echo_delays_ns"))
                                           : std::vector<double>{};
        const auto amps = kv.count("irf_echo_amplitudes")
                              ? to_list("irf_echo_amplitudes", kv.at("irf_echo_amplitudes"))
                              : std::vector<double>{};
        if (delays.size() != amps.size())
            throw std::invalid_argument(
                "irf_echo_delays_ns / irf_echo_amplitudes: list lengths differ");
        for (std::size_t i = 0; i < delays.size(); ++i)
            irf.echoes.push_back({delays[i] * 1e3, amps[i]});
        config.irf = irf;
    } else if (irf_type == "empirical") {
        if (!kv.count("irf_file"))
            throw std::invalid_argument("irf_file: required when irf_type = empirical");
        auto irf = EmpiricalIrf::from_histogram(read_histogram(kv.at("irf_file")));
        irf.source_path = kv.at("irf_file");
        config.irf = irf;
    } else {
        throw std::invalid_argument("irf_type: must be 'parametric' or 'empirical'");
    }

    config.tdc.bin_width_ps = to_double("tdc_bin_width_ps", kv.at("tdc_bin_width_ps"));
    config.tdc.jitter_sigma_ps = to_double("tdc_jitter_sigma_ps", kv.at("tdc_jitter_sigma_ps"));
    config.tdc.scale_error_ppm = to_double("tdc_scale_error_ppm", kv.at("tdc_scale_error_ppm"));
    config.tdc.inl_rms_ps = to_double("tdc_inl_rms_ps", kv.at("tdc_inl_rms_ps"));
    config.tdc.inl_seed = to_u64("tdc_inl_seed", kv.at("tdc_inl_seed"));

    config.beats.enabled =
        kv.count("beats_enabled") ? to_u64("beats_enabled", kv.at("beats_enabled")) != 0 : false;
    if (kv.count("beat_amplitude"))
        config.beats.amplitude = to_double("beat_amplitude", kv.at("beat_amplitude"));
    if (kv.count("beat_frequency_rad_per_s"))
        config.beats.frequency_rad_per_s =
            to_double("beat_frequency_rad_per_s", kv.at("beat_frequency_rad_per_s"));
    if (kv.count("beat_phase_rad"))
        config.beats.phase_rad = to_double("beat_phase_rad", kv.at("beat_phase_rad"));

    if (kv.count("irf_measurement_shift_ps"))
        config.irf_measurement.delay_shift_ps =
            to_double("irf_measurement_shift_ps", kv.at("irf_measurement_shift_ps"));
    if (kv.count("irf_measurement_rise_scale"))
        config.irf_measurement.rise_scale =
            to_double("irf_measurement_rise_scale", kv.at("irf_measurement_rise_scale"));
    config.detection_efficiency = to_double("detection_efficiency", kv.at("detection_efficiency"));
    config.prompt_scatter_prob = to_double("prompt_scatter_prob", kv.at("prompt_scatter_prob"));
    config.background_rate_hz = to_double("background_rate_hz", kv.at("background_rate_hz"));
    config.duration_s = to_double("duration_s", kv.at("duration_s"));
    config.seed = to_u64("seed", kv.at("seed"));
    if (kv.count("trap_label")) config.trap_label = kv.at("trap_label");

    validate(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

std::string dump_config(const ExperimentConfig& config) {
    std::ostringstream out;
    out << "transition_label = " << config.transition.label << "\n";
    out << "lifetime_true_ns = " << format_double(config.transition.lifetime_ns) << "\n";
    out << "wavelength_nm = " << format_double(config.transition.wavelength_nm) << "\n";
    out << "pulse_energy_pj = " << format_double(config.pulse.energy_pj) << "\n";
    out << "pulse_duration_ps = " << format_double(config.pulse.duration_ps) << "\n";
    out << "beam_waist_um = " << format_double(config.pulse.waist_um) << "\n";
    out << "pulses_per_cycle = " << config.train.pulses_per_cycle << "\n";
    out << "pulse_spacing_ns = " << format_double(config.train.pulse_spacing_ps * 1e-3) << "\n";
    out << "cooling_window_ns = " << format_double(config.train.cooling_window_ps * 1e-3) << "\n";
    out << "cycle_rate_hz = " << format_double(config.train.cycle_rate_hz) << "\n";
    if (const auto* irf = std::get_if<ParametricIrf>(&config.irf)) {
        out << "irf_type = parametric\n";
        out << "irf_transit_delay_ns = " << format_double(irf->transit_delay_ps * 1e-3) << "\n";
        out << "irf_rise_sigma_ps = " << format_double(irf->rise_sigma_ps) << "\n";
        out << "irf_tail_ns = " << format_double(irf->tail_ps * 1e-3) << "\n";
        if (!irf->echoes.empty()) {
            out << "irf_echo_delays_ns = ";
            for (std::size_t i = 0; i < irf->echoes.size(); ++i)
                out << (i ? ", " : "") << format_double(irf->echoes[i].delay_ps * 1e-3);
            out << "\nirf_echo_amplitudes = ";
            for (std::size_t i = 0; i < irf->echoes.size(); ++i)
                out << (i ? ", " : "") << format_double(irf->echoes[i].amplitude);
            out << "\n";
        }
    } else {
        const auto& empirical = std::get<EmpiricalIrf>(config.irf);
        if (empirical.source_path.empty())
            throw std::invalid_argument(
                "dump_config: empirical response has no source file to reference");
        out << "irf_type = empirical\n";
        out << "irf_file = " << empirical.source_path << "\n";
    }
    out << "irf_measurement_shift_ps = "
        << format_double(config.irf_measurement.delay_shift_ps) << "\n";
    out << "irf_measurement_rise_scale = "
        << format_double(config.irf_measurement.rise_scale) << "\n";
    out << "tdc_bin_width_ps = " << format_double(config.tdc.bin_width_ps) << "\n";
    out << "tdc_jitter_sigma_ps = " << format_double(config.tdc.jitter_sigma_ps) << "\n";
    out << "tdc_scale_error_ppm = " << format_double(config.tdc.scale_error_ppm) << "\n";
    out << "tdc_inl_rms_ps = " << format_double(config.tdc.inl_rms_ps) << "\n";
    out << "tdc_inl_seed = " << config.tdc.inl_seed << "\n";
    out << "beats_enabled = " << (config.beats.enabled ? 1 : 0) << "\n";
    out << "beat_amplitude = " << format_double(config.beats.amplitude) << "\n";
    out << "beat_frequency_rad_per_s = " << format_double(config.beats.frequency_rad_per_s)
        << "\n";
    out << "beat_phase_rad = " << format_double(config.beats.phase_rad) << "\n";
    out << "detection_efficiency = " << format_double(config.detection_efficiency) << "\n";
    out << "prompt_scatter_prob = " << format_double(config.prompt_scatter_prob) << "\n";
    out << "background_rate_hz = " << format_double(config.background_rate_hz) << "\n";
    out << "duration_s = " << format_double(config.duration_s) << "\n";
    out << "seed = " << config.seed << "\n";
    out << "trap_label = " << config.trap_label << "\n";
    return out.str();
}

std::string preset_path(const std::string& name) {
    const char* env = std::getenv("TCSPC_PRESET_DIR");
    const std::string dir = env && *env ? env : TCSPC_PRESET_DIR;
    return dir + "/" + name + ".cfg";
}

}  // namespace tcspc
