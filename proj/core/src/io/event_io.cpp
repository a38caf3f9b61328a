#include "tcspc/io/event_io.hpp"

#include <fstream>
#include <sstream>

#include "tcspc/io/histogram_io.hpp"
#include "tcspc/io/io_error.hpp"

namespace tcspc {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
    throw std::invalid_argument(path + ":" + std::to_string(line) + ": " + what);
}

EventKind parse_kind(const std::string& word, const std::string& path, std::size_t line) {
    if (word == "decay") return EventKind::decay;
    if (word == "prompt") return EventKind::prompt;
    if (word == "background") return EventKind::background;
    fail(path, line, "unknown event kind '" + word + "'");
}

}  // namespace

void write_events(const std::string& path, std::span<const EventRecord> events,
                  bool include_kind) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << (include_kind ? "cycle,pulse,raw_time_ps,kind\n" : "cycle,pulse,raw_time_ps\n");
    for (const auto& ev : events) {
        out << ev.cycle_index << ',' << ev.pulse_index << ',' << format_double(ev.raw_time_ps);
        if (include_kind) out << ',' << to_string(ev.kind);
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path + "'");
}

std::vector<EventRecord> read_events(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::vector<EventRecord> events;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    bool has_kind = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            if (line.rfind("cycle,", 0) == 0) {
                has_kind = line.find(",kind") != std::string::npos;
                continue;
            }
            fail(path, line_no, "missing 'cycle,pulse,raw_time_ps[,kind]' header");
        }
        std::istringstream row(line);
        std::string field;
        EventRecord ev;
        try {
            if (!std::getline(row, field, ',')) fail(path, line_no, "missing cycle");
            ev.cycle_index = std::stoull(field);
            if (!std::getline(row, field, ',')) fail(path, line_no, "missing pulse");
            ev.pulse_index = static_cast<std::uint32_t>(std::stoul(field));
            if (!std::getline(row, field, ',')) fail(path, line_no, "missing raw_time_ps");
            ev.raw_time_ps = std::stod(field);
        } catch (const std::invalid_argument&) {
            fail(path, line_no, "malformed event row");
        }
        if (has_kind) {
            if (!std::getline(row, field, ',')) fail(path, line_no, "missing kind");
            ev.kind = parse_kind(field, path, line_no);
        }
        events.push_back(ev);
    }
    return events;
}

}  // namespace tcspc
