#include "tcspc/io/histogram_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tcspc/io/io_error.hpp"

namespace tcspc {

std::string format_double(double value) {
    char buf[64];
    for (int precision : {15, 16, 17}) {
        std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

[[noreturn]] void fail(const std::string& context, std::size_t line, const std::string& what) {
    throw std::invalid_argument(context + ":" + std::to_string(line) + ": " + what);
}

}  // namespace

std::string histogram_to_string(const TimeHistogram& hist) {
    std::ostringstream out;
    out << "# tcspc histogram v1\n";
    out << "# bin_width_ps = " << format_double(hist.bin_width_ps) << "\n";
    out << "# origin_ps = " << format_double(hist.origin_ps) << "\n";
    out << "# exposure_s = " << format_double(hist.exposure_s) << "\n";
    for (const auto& [key, value] : hist.metadata)
        out << "# meta." << key << " = " << value << "\n";
    for (std::size_t i = 0; i < hist.counts.size(); ++i)
        out << format_double(hist.bin_start_ps(i)) << "," << hist.counts[i] << "\n";
    return out.str();
}

TimeHistogram histogram_from_string(const std::string& text, const std::string& context) {
    TimeHistogram hist;
    hist.counts.clear();
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    bool have_width = false;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '#') {
            const std::string header = trim(t.substr(1));
            const auto eq = header.find('=');
            if (eq == std::string::npos) continue;  // banner / free comment
            const std::string key = trim(header.substr(0, eq));
            const std::string value = trim(header.substr(eq + 1));
            try {
                if (key == "bin_width_ps") {
                    hist.bin_width_ps = std::stod(value);
                    have_width = true;
                } else if (key == "origin_ps") {
                    hist.origin_ps = std::stod(value);
                } else if (key == "exposure_s") {
                    hist.exposure_s = std::stod(value);
                } else if (key.rfind("meta.", 0) == 0) {
                    hist.metadata[key.substr(5)] = value;
                }
            } catch (const std::exception&) {
                fail(context, line_no, "bad header value for '" + key + "'");
            }
            continue;
        }
        const auto comma = t.find(',');
        if (comma == std::string::npos) fail(context, line_no, "expected 'bin_start_ps,count'");
        const std::string start_str = trim(t.substr(0, comma));
        const std::string count_str = trim(t.substr(comma + 1));
        double start = 0.0;
        try {
            start = std::stod(start_str);
        } catch (const std::exception&) {
            fail(context, line_no, "bad bin start '" + start_str + "'");
        }
        std::int64_t count = 0;
        const auto [ptr, ec] =
            std::from_chars(count_str.data(), count_str.data() + count_str.size(), count);
        if (ec != std::errc{} || ptr != count_str.data() + count_str.size())
            fail(context, line_no, "bad count '" + count_str + "'");
        if (count < 0) fail(context, line_no, "negative count");
        if (!have_width) fail(context, line_no, "bin row before bin_width_ps header");
        const double expected = hist.origin_ps +
                                hist.bin_width_ps * static_cast<double>(hist.counts.size());
        if (std::fabs(start - expected) > 1e-6 * std::max(1.0, std::fabs(expected)))
            fail(context, line_no, "bin start " + start_str + " does not continue the grid");
        hist.counts.push_back(count);
    }
    if (!have_width) throw std::invalid_argument(context + ": missing bin_width_ps header");
    return hist;
}

void write_histogram(const std::string& path, const TimeHistogram& hist) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << histogram_to_string(hist);
    if (!out) throw IoError("write failed for '" + path + "'");
}

TimeHistogram read_histogram(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return histogram_from_string(buffer.str(), path);
}

}  // namespace tcspc
