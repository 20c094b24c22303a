#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "memseize/dataset.hpp"
#include "memseize/edf.hpp"
#include "memseize/preprocess.hpp"
#include "memseize/rng.hpp"
#include "memseize/util.hpp"

using namespace memseize;

namespace {

EdfSignalHeader test_signal(const std::string& label, int spr = 4) {
    EdfSignalHeader h;
    h.label = label;
    h.phys_dim = "uV";
    h.phys_min = -1000.0;
    h.phys_max = 1000.0;
    h.dig_min = -32768.0;
    h.dig_max = 32767.0;
    h.samples_per_record = spr;
    return h;
}

}  // namespace

TEST_CASE("EDF samples decode as little-endian two's complement") {
    const EdfFile edf = make_edf({test_signal("A", 2)}, {{1, -32768}}, 1, 1.0);
    const std::string bytes = write_edf(edf);
    const std::size_t data_off = 256 * 2;
    CHECK(static_cast<unsigned char>(bytes[data_off]) == 0x01);
    CHECK(static_cast<unsigned char>(bytes[data_off + 1]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[data_off + 2]) == 0x00);
    CHECK(static_cast<unsigned char>(bytes[data_off + 3]) == 0x80);
    const EdfFile parsed = parse_edf(bytes);
    CHECK(parsed.samples[0][0] == 1);
    CHECK(parsed.samples[0][1] == -32768);
}

TEST_CASE("calibration maps digital range endpoints to physical endpoints") {
    const EdfFile edf = make_edf({test_signal("A", 2)}, {{-32768, 32767}}, 1, 1.0);
    const EegRecord rec = to_eeg_record(parse_edf(write_edf(edf)));
    CHECK(rec.physical(0, 0) == doctest::Approx(-1000.0).epsilon(1e-12));
    CHECK(rec.physical(0, 1) == doctest::Approx(1000.0).epsilon(1e-12));
}

TEST_CASE("generated EDF fixtures round-trip byte-exactly") {
    std::vector<std::vector<std::int16_t>> data(2);
    for (int i = 0; i < 40; ++i) {
        data[0].push_back(static_cast<std::int16_t>(
            std::lround(3000.0 * std::sin(2.0 * M_PI * i / 10.0))));
        data[1].push_back(static_cast<std::int16_t>(i * 7 - 140));
    }
    const EdfFile edf = make_edf({test_signal("sine"), test_signal("ramp")}, data, 10, 0.5);
    const std::string bytes = write_edf(edf);
    const EdfFile parsed = parse_edf(bytes);
    CHECK(write_edf(parsed) == bytes);
    CHECK(parsed.n_records == 10);
    CHECK(parsed.record_duration == 0.5);
    CHECK(parsed.signals[0].label == "sine");
    CHECK(parsed.samples == data);
}

TEST_CASE("EDF parser reports structured errors") {
    const EdfFile edf = make_edf({test_signal("A", 2)}, {{1, 2, 3, 4}}, 2, 1.0);
    const std::string bytes = write_edf(edf);

    SUBCASE("truncated file") {
        CHECK_THROWS_AS(parse_edf(bytes.substr(0, 100)), ParseError);
        CHECK_THROWS_AS(parse_edf(bytes.substr(0, bytes.size() - 2)), ParseError);
    }
    SUBCASE("trailing garbage is an inconsistent record count") {
        CHECK_THROWS_AS(parse_edf(bytes + "xx"), ParseError);
    }
    SUBCASE("zero digital range") {
        EdfSignalHeader bad = test_signal("A", 2);
        bad.dig_min = bad.dig_max = 5.0;
        CHECK_THROWS_AS(parse_edf(write_edf(make_edf({bad}, {{1, 2}}, 1, 1.0))), ParseError);
    }
    SUBCASE("malformed numeric header field") {
        std::string mangled = bytes;
        for (int i = 0; i < 8; ++i) mangled[236 + i] = 'q';  // record count field
        CHECK_THROWS_AS(parse_edf(mangled), ParseError);
    }
}

TEST_CASE("annotation parsing extracts seizure intervals") {
    SUBCASE("single seizure") {
        const std::string text =
            "File Name: chb01_03.edf\n"
            "File Start Time: 13:43:04\n"
            "Number of Seizures in File: 1\n"
            "Seizure Start Time: 2996 seconds\n"
            "Seizure End Time: 3036 seconds\n";
        const auto anns = parse_annotations(text);
        REQUIRE(anns.size() == 1);
        CHECK(anns[0].file_id == "chb01_03.edf");
        CHECK(anns[0].onset_s == 2996.0);
        CHECK(anns[0].end_s == 3036.0);
    }
    SUBCASE("zero seizures yields an empty list") {
        const auto anns = parse_annotations(
            "File Name: chb01_01.edf\nNumber of Seizures in File: 0\n");
        CHECK(anns.empty());
    }
    SUBCASE("two seizures come back in onset order") {
        const std::string text =
            "File Name: a.edf\n"
            "Number of Seizures in File: 2\n"
            "Seizure 1 Start Time: 100 seconds\n"
            "Seizure 1 End Time: 130 seconds\n"
            "Seizure 2 Start Time: 500 seconds\n"
            "Seizure 2 End Time: 560 seconds\n";
        const auto anns = parse_annotations(text);
        REQUIRE(anns.size() == 2);
        CHECK(anns[0].onset_s == 100.0);
        CHECK(anns[1].onset_s == 500.0);
    }
    SUBCASE("end before start is rejected") {
        const std::string text =
            "File Name: a.edf\n"
            "Seizure Start Time: 100 seconds\n"
            "Seizure End Time: 90 seconds\n";
        CHECK_THROWS_AS(parse_annotations(text), ParseError);
    }
    SUBCASE("missing end is rejected") {
        CHECK_THROWS_AS(
            parse_annotations("File Name: a.edf\nSeizure Start Time: 100 seconds\n"),
            ParseError);
    }
}

TEST_CASE("spectrogram frame count is twice the window seconds at 256 Hz") {
    Rng rng(3);
    for (const int t : {10, 20, 30}) {
        std::vector<std::vector<double>> chans(2);
        for (auto& ch : chans) {
            ch.resize(static_cast<std::size_t>(t) * 256);
            for (auto& v : ch) v = rng.next_double() - 0.5;
        }
        const Tensor3 spec = spectrogram(chans, t, 256.0);
        CHECK(spec.c == 2);
        CHECK(spec.h == 2 * t);
        CHECK(spec.w == 114);
    }
    CHECK(retained_bins().size() == 114);
}

TEST_CASE("a 22-channel 30 s window yields a 22x60x114 tensor") {
    std::vector<std::vector<double>> chans(22, std::vector<double>(7680, 0.25));
    const Tensor3 spec = spectrogram(chans, 30.0, 256.0);
    CHECK(spec.c == 22);
    CHECK(spec.h == 60);
    CHECK(spec.w == 114);
}

TEST_CASE("a constant signal leaves no energy in the retained bins") {
    std::vector<std::vector<double>> chans(1, std::vector<double>(7680, 1.0));
    const Tensor3 spec = spectrogram(chans, 30.0, 256.0);
    const double input_energy = 7680.0;  // sum of squares
    for (double v : spec.data) CHECK(std::abs(v) < 1e-6 * input_energy);
}

TEST_CASE("a pure 10 Hz tone peaks at the 10 Hz bin in every interior frame") {
    std::vector<std::vector<double>> chans(1);
    chans[0].resize(7680);
    for (std::size_t i = 0; i < chans[0].size(); ++i)
        chans[0][i] = std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / 256.0);
    const Tensor3 spec = spectrogram(chans, 30.0, 256.0);
    const int expected_idx = 9;  // retained bins start at 1 Hz
    CHECK(retained_bins()[static_cast<std::size_t>(expected_idx)] == 10);
    for (int f = 0; f < spec.h - 1; ++f) {
        int argmax = 0;
        for (int b = 1; b < spec.w; ++b)
            if (spec.at(0, f, b) > spec.at(0, f, argmax)) argmax = b;
        CHECK(argmax == expected_idx);
    }
}

TEST_CASE("wrong window length is rejected") {
    std::vector<std::vector<double>> chans(1, std::vector<double>(7000, 0.0));
    CHECK_THROWS_AS(spectrogram(chans, 30.0, 256.0), std::invalid_argument);
}

TEST_CASE("leading seizure selection") {
    SUBCASE("a seizure within the occurrence period of the previous one is dropped") {
        const auto kept = select_leading({{0.0, 60.0}, {1200.0, 1260.0}}, 30.0);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].begin_s == 0.0);
    }
    SUBCASE("well separated seizures are both kept") {
        const auto kept = select_leading({{0.0, 60.0}, {2700.0, 2760.0}}, 30.0);
        CHECK(kept.size() == 2);
    }
    SUBCASE("a single seizure is kept") {
        CHECK(select_leading({{100.0, 160.0}}, 30.0).size() == 1);
    }
    SUBCASE("dropped seizures still shadow later ones") {
        // second dropped; third is within T of the second's end, so dropped too
        const auto kept =
            select_leading({{0.0, 60.0}, {900.0, 960.0}, {2400.0, 2460.0}}, 30.0);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].begin_s == 0.0);
    }
}

TEST_CASE("window labeling follows the clinical timing rules") {
    ClinicalWindows cw;
    cw.window_seconds = 30.0;
    const double onset = 120.0 * 60.0;
    const std::vector<Interval> leading{{onset, onset + 60.0}};
    const auto windows = label_windows(130.0 * 60.0, leading, cw);

    auto label_at = [&](double off) -> const WindowLabel* {
        for (const auto& w : windows)
            if (w.offset_s == off) return &w;
        return nullptr;
    };

    // preictal band is [55, 85] minutes
    const WindowLabel* in_band = label_at(57.0 * 60.0);
    REQUIRE(in_band != nullptr);
    CHECK(in_band->label == WindowClass::Preictal);

    CHECK(label_at(100.0 * 60.0) == nullptr);  // inside the horizon gap

    ClinicalWindows long_cw = cw;
    const double late_onset = 11.0 * 3600.0;
    const auto far = label_windows(12.0 * 3600.0, {{late_onset, late_onset + 30.0}}, long_cw);
    bool found = false;
    for (const auto& w : far)
        if (w.offset_s == late_onset - 10.0 * 3600.0) {
            found = true;
            CHECK(w.label == WindowClass::Interictal);
        }
    CHECK(found);
}

TEST_CASE("no window is labeled both preictal and interictal") {
    ClinicalWindows cw;
    cw.window_seconds = 30.0;
    Rng rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Interval> seizures;
        double t0 = 3600.0 + rng.next_double() * 3600.0;
        for (int s = 0; s < 3; ++s) {
            seizures.push_back({t0, t0 + 30.0 + rng.next_double() * 60.0});
            t0 += 2000.0 + rng.next_double() * 8000.0;
        }
        const auto leading = select_leading(seizures, cw.sop_minutes);
        const auto windows = label_windows(t0 + 7200.0, leading, cw);
        std::vector<double> seen;
        const double sph = cw.sph_minutes * 60.0;
        for (const auto& w : windows) {
            for (const double off : seen) CHECK(off != w.offset_s);
            seen.push_back(w.offset_s);
            if (w.label == WindowClass::Preictal)
                for (const auto& s : leading) {
                    const bool in_gap =
                        w.offset_s + cw.window_seconds > s.begin_s - sph && w.offset_s < s.begin_s;
                    CHECK_FALSE(in_gap);
                }
        }
    }
}

TEST_CASE("overlap balancing hits the requested count") {
    SUBCASE("step equals the window length when counts already match") {
        const BalanceResult r = balance_overlap({{0.0, 3600.0}}, 120, 30.0);
        CHECK(r.step_s == doctest::Approx(30.0).epsilon(1e-12));
        CHECK(r.windows.size() == 120);
        for (const auto& w : r.windows) CHECK_FALSE(w.synthetic);
    }
    SUBCASE("doubling the target halves the step") {
        const BalanceResult r = balance_overlap({{0.0, 3600.0}}, 239, 30.0);
        CHECK(r.step_s == doctest::Approx(15.0).epsilon(1e-12));
        CHECK(r.windows.size() == 239);
        int synthetic = 0;
        for (const auto& w : r.windows) synthetic += w.synthetic ? 1 : 0;
        CHECK(synthetic == 119);
    }
    SUBCASE("a single target yields one window at the span start") {
        const BalanceResult r = balance_overlap({{500.0, 4100.0}}, 1, 30.0);
        REQUIRE(r.windows.size() == 1);
        CHECK(r.windows[0].offset_s == 500.0);
        CHECK(r.step_s == 30.0);
    }
    SUBCASE("a span shorter than the window degenerates to one window") {
        const BalanceResult r = balance_overlap({{100.0, 120.0}}, 10, 30.0);
        CHECK(r.windows.size() == 1);
        CHECK(r.step_s == 30.0);
    }
}

TEST_CASE("balancing equalizes class counts over randomized scenarios") {
    Rng rng(1234);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const double t = 10.0 * (1 + rng.next_below(3));
        const int n_spans = 1 + static_cast<int>(rng.next_below(3));
        std::vector<Interval> spans;
        double pos = rng.next_double() * 500.0;
        double total = 0.0;
        for (int s = 0; s < n_spans; ++s) {
            const double len = t + rng.next_double() * 2000.0;
            spans.push_back({pos, pos + len});
            total += len;
            pos += len + 100.0 + rng.next_double() * 400.0;
        }
        const int n_inter = 1 + static_cast<int>(rng.next_below(300));
        if (total <= t) continue;
        const BalanceResult r = balance_overlap(spans, n_inter, t);
        const long diff =
            std::labs(static_cast<long>(r.windows.size()) - static_cast<long>(n_inter));
        if (n_inter == 1)
            CHECK(r.windows.size() == 1);
        else
            CHECK(diff <= 1);
        // windows stay inside the recording spans they were cut from
        for (const auto& w : r.windows) {
            bool inside_any = false;
            for (const auto& s : spans)
                inside_any = inside_any ||
                             (w.offset_s >= s.begin_s - 1e-9 && w.offset_s + t <= s.end_s + 1e-6);
            if (n_spans == 1) CHECK(inside_any);
        }
        ++checked;
    }
    CHECK(checked >= 40);
}

TEST_CASE("dataset save/load round-trips") {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.channels = 2;
    ds.frames = 44;
    Rng rng(5);
    for (int i = 0; i < 3; ++i) {
        DatasetWindow w;
        w.source = "test.edf";
        w.offset_s = i * 30.0;
        w.label = i % 2 ? WindowClass::Preictal : WindowClass::Interictal;
        w.synthetic = i == 2;
        ds.index.push_back(w);
        for (std::size_t k = 0; k < ds.window_values(); ++k)
            ds.data.push_back(static_cast<float>(rng.next_double()));
    }
    const fs::path dir = fs::temp_directory_path() / "memseize_dataset_test";
    fs::remove_all(dir);
    save_dataset(dir, ds);
    const Dataset loaded = load_dataset(dir, 2, 44);
    CHECK(loaded.data == ds.data);
    CHECK(loaded.index.size() == 3);
    CHECK(loaded.index[2].synthetic);
    CHECK(loaded.labels() == std::vector<int>{0, 1, 0});
    CHECK_THROWS(load_dataset(dir, 3, 44));
    fs::remove_all(dir);
}
