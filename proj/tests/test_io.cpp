// File formats: lossless round trips, named-key diagnostics, preset loading.
#include <doctest.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>

#include "tcspc/io/config_io.hpp"
#include "tcspc/io/event_io.hpp"
#include "tcspc/io/histogram_io.hpp"
#include "tcspc/io/io_error.hpp"
#include "tcspc/io/report.hpp"
#include "tcspc/sim/rng.hpp"

using namespace tcspc;

namespace {

std::string temp_file(const char* name) {
    return std::string("/tmp/tcspc_test_") + name;
}

}  // namespace

TEST_CASE("config: presets load with the published lifetimes") {
    const auto p12 = load_config(preset_path("p12_quadrupole"));
    CHECK(p12.transition.lifetime_ns == 3.148);
    CHECK(p12.transition.label == "P1/2");
    CHECK(p12.trap_label == "quadrupole");
    const auto p32 = load_config(preset_path("p32_quadrupole"));
    CHECK(p32.transition.lifetime_ns == 2.647);
    CHECK(p32.transition.wavelength_nm == 214.5);
}

TEST_CASE("config: empty file lists the required keys") {
    try {
        parse_config("", "empty.cfg");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        const std::string message = e.what();
        CHECK(message.find("missing required keys") != std::string::npos);
        CHECK(message.find("lifetime_true_ns") != std::string::npos);
        CHECK(message.find("tdc_bin_width_ps") != std::string::npos);
        CHECK(message.find("seed") != std::string::npos);
    }
}

TEST_CASE("config: negative bin width is rejected citing the TdcSpec invariant") {
    std::ifstream in(preset_path("p12_quadrupole"));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto pos = text.find("tdc_bin_width_ps = 100");
    REQUIRE(pos != std::string::npos);
    text.replace(pos, 22, "tdc_bin_width_ps = -50");
    try {
        parse_config(text, "bad.cfg");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("TdcSpec.bin_width_ps") != std::string::npos);
    }
}

TEST_CASE("config: unknown keys are rejected by name") {
    std::ifstream in(preset_path("p12_quadrupole"));
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    text += "detector_gain = 7\n";
    try {
        parse_config(text, "extra.cfg");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("detector_gain") != std::string::npos);
    }
}

TEST_CASE("config: dump and parse round-trip") {
    const auto config = load_config(preset_path("p32_quadrupole"));
    const auto again = parse_config(dump_config(config), "roundtrip");
    CHECK(again.transition.lifetime_ns == config.transition.lifetime_ns);
    CHECK(again.detection_efficiency == config.detection_efficiency);
    CHECK(again.seed == config.seed);
    CHECK(dump_config(again) == dump_config(config));
}

TEST_CASE("histogram file: write then read is the identity") {
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    hist.origin_ps = 0.0;
    hist.exposure_s = 12.5;
    hist.counts = {0, 3, 999999999999, 7};
    hist.metadata["label"] = "folded";
    hist.metadata["overflow"] = "3";
    const auto path = temp_file("hist.dat");
    write_histogram(path, hist);
    const auto back = read_histogram(path);
    CHECK(back.counts == hist.counts);
    CHECK(back.bin_width_ps == hist.bin_width_ps);
    CHECK(back.exposure_s == hist.exposure_s);
    CHECK(back.metadata == hist.metadata);
    std::remove(path.c_str());
}

TEST_CASE("histogram file: malformed rows name their line") {
    try {
        histogram_from_string("# bin_width_ps = 100\n0,5\n100,-2\n", "h.dat");
        FAIL("expected an exception");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("h.dat:3") != std::string::npos);
        CHECK(std::string(e.what()).find("negative") != std::string::npos);
    }
    CHECK_THROWS_AS(histogram_from_string("# bin_width_ps = 100\nnot a row\n", "h.dat"),
                    std::invalid_argument);
    CHECK_THROWS_AS(read_histogram("/nonexistent/h.dat"), IoError);
}

TEST_CASE("histogram file: a million-bin round trip stays under a second") {
    TimeHistogram hist;
    hist.bin_width_ps = 100.0;
    RandomStream rng(51, 0);
    hist.counts.resize(1'000'000);
    for (auto& c : hist.counts) c = static_cast<std::int64_t>(rng.uniform() * 100.0);
    const auto path = temp_file("big_hist.dat");
    const auto start = std::chrono::steady_clock::now();
    write_histogram(path, hist);
    const auto back = read_histogram(path);
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start);
    CHECK(back.counts == hist.counts);
    CHECK(elapsed.count() < 1.0);
    std::remove(path.c_str());
}

TEST_CASE("event file: round trip, and the blind flag hides truth tags") {
    std::vector<EventRecord> events;
    events.push_back({0, 3, 842300.0, EventKind::decay});
    events.push_back({5, 0, 991100.0, EventKind::prompt});
    events.push_back({7, 14, 12000.0, EventKind::background});

    const auto path = temp_file("events.csv");
    write_events(path, events, true);
    const auto back = read_events(path);
    REQUIRE(back.size() == events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        CHECK(back[i].cycle_index == events[i].cycle_index);
        CHECK(back[i].pulse_index == events[i].pulse_index);
        CHECK(back[i].raw_time_ps == events[i].raw_time_ps);
        CHECK(back[i].kind == events[i].kind);
    }

    write_events(path, events, false);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "cycle,pulse,raw_time_ps");
    const auto blinded = read_events(path);
    REQUIRE(blinded.size() == events.size());
    for (const auto& ev : blinded) CHECK(ev.kind == EventKind::decay);
    std::remove(path.c_str());
}

TEST_CASE("result file: round trip") {
    LifetimeResult result{"quadrupole", 3147.6, 5.2, 10.4, 11.6, "quadrature"};
    const auto path = temp_file("result.txt");
    write_result_file(path, result);
    const auto back = read_result_file(path);
    CHECK(back.trap_label == result.trap_label);
    CHECK(back.tau_ps == doctest::Approx(result.tau_ps).epsilon(1e-12));
    CHECK(back.final_error_ps == doctest::Approx(result.final_error_ps).epsilon(1e-12));
    std::remove(path.c_str());
}

TEST_CASE("manifest: embedded config reproduces the run configuration") {
    RunManifest manifest;
    manifest.code_version = "0.1.0";
    manifest.created_at = "2026-01-01T00:00:00Z";
    manifest.seed = 777;
    manifest.outputs["events"] = "events.csv";
    manifest.config = load_config(preset_path("p12_quadrupole"));
    const auto path = temp_file("manifest.txt");
    write_manifest(path, manifest);
    const auto back = read_manifest(path);
    CHECK(back.seed == 777);
    CHECK(back.outputs.at("events") == "events.csv");
    CHECK(dump_config(back.config) == dump_config(manifest.config));
    std::remove(path.c_str());
}
