#include "memseize/synth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "memseize/edf.hpp"
#include "memseize/util.hpp"

namespace memseize {

namespace fs = std::filesystem;

RunConfig make_toy_dataset(const fs::path& dir, int n_windows, std::uint64_t seed) {
    const int frames = 44;  // 22 s windows
    const int per_class = n_windows / 2;
    const Rng rng = Rng(seed).derive(0x70ull);
    Dataset ds;
    ds.channels = 1;
    ds.frames = frames;

    for (int i = 0; i < per_class * 2; ++i) {
        const int label = i % 2;
        const double cf = label == 1 ? 30.0 : 12.0;
        const double cb = label == 1 ? 80.0 : 30.0;
        Rng wnd = rng.derive(static_cast<std::uint64_t>(i));
        for (int f = 0; f < frames; ++f)
            for (int b = 0; b < kSpectrogramBins; ++b) {
                const double df = (f - cf) / 4.0, db = (b - cb) / 6.0;
                const double v =
                    3.0 * std::exp(-0.5 * (df * df + db * db)) + 0.4 * wnd.next_double();
                ds.data.push_back(static_cast<float>(v));
            }
        DatasetWindow w;
        w.source = "toy";
        w.offset_s = i * 22.0;
        w.label = label == 1 ? WindowClass::Preictal : WindowClass::Interictal;
        // every fifth preictal window is an overlapped (synthetic) sample
        w.synthetic = label == 1 && (i / 2) % 5 == 4;
        ds.index.push_back(std::move(w));
    }
    save_dataset(dir / "dataset", ds);

    RunConfig cfg;
    cfg.data_dir = dir / "dataset";
    cfg.output_dir = dir / "out";
    cfg.channels = 1;
    cfg.clinical.window_seconds = 22.0;
    cfg.clinical.sop_minutes = 6.0;
    cfg.clinical.sph_minutes = 4.0;
    cfg.clinical.interictal_guard_hours = 0.1;
    cfg.training.epochs = 20;
    cfg.training.batch = 32;
    cfg.training.lr = 1e-3;
    cfg.training.folds = 5;
    cfg.sweep.sigmas = {0.0, 400.0};
    cfg.sweep.states = {8};
    cfg.sweep.seeds = 3;
    cfg.sweep.window_seconds = cfg.clinical.window_seconds;
    cfg.seed = seed;
    // Config-file paths stay relative to the file so fixtures are movable.
    RunConfig on_disk = cfg;
    on_disk.data_dir = "dataset";
    on_disk.output_dir = "out";
    write_file_atomic(dir / "toy.ini", on_disk.serialize());
    return cfg;
}

namespace {

std::vector<std::int16_t> render_channel(int ch, std::size_t n_samples, double t0,
                                         double sample_rate, const Interval& preictal_band,
                                         Rng rng) {
    std::vector<std::int16_t> out(n_samples);
    const double base_hz = 4.0 + 3.0 * ch;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = t0 + static_cast<double>(i) / sample_rate;
        double v = 120.0 * std::sin(2.0 * M_PI * base_hz * t) +
                   60.0 * std::sin(2.0 * M_PI * (base_hz * 2.3) * t) +
                   40.0 * (rng.next_double() - 0.5);
        if (t >= preictal_band.begin_s && t < preictal_band.end_s)
            v += 300.0 * std::sin(2.0 * M_PI * 10.0 * t);
        out[i] = static_cast<std::int16_t>(std::lround(std::clamp(v, -950.0, 950.0) * 32.0));
    }
    return out;
}

}  // namespace

RunConfig make_edf_fixtures(const fs::path& dir, std::uint64_t seed) {
    const double fs = 256.0;
    const int n_channels = 4;
    const int dur1 = 1000, dur2 = 1060;   // seconds per file
    const Interval band{1050.0, 1410.0};  // global preictal band for content
    const double onset = 1650.0, end = 1680.0;

    std::vector<EdfSignalHeader> headers;
    for (int c = 0; c < n_channels; ++c) {
        EdfSignalHeader h;
        h.label = "CH" + std::to_string(c + 1);
        h.transducer = "synthetic";
        h.phys_dim = "uV";
        h.phys_min = -1000.0;
        h.phys_max = 1000.0;
        h.dig_min = -32000.0;
        h.dig_max = 32000.0;
        h.samples_per_record = static_cast<int>(fs);
        headers.push_back(h);
    }

    const Rng base(seed);
    fs::create_directories(dir / "edf");
    double t0 = 0.0;
    const int durations[] = {dur1, dur2};
    for (int f = 0; f < 2; ++f) {
        std::vector<std::vector<std::int16_t>> chans;
        for (int c = 0; c < n_channels; ++c)
            chans.push_back(render_channel(
                c, static_cast<std::size_t>(durations[f]) * static_cast<std::size_t>(fs), t0,
                fs, band, base.derive(static_cast<std::uint64_t>(f) * 16 + c)));
        const EdfFile edf = make_edf(headers, chans, durations[f], 1.0);
        const std::string name = "synth_0" + std::to_string(f + 1) + ".edf";
        write_file_atomic(dir / "edf" / name, write_edf(edf));
        t0 += durations[f];
    }

    std::ostringstream summary;
    summary << "Data Sampling Rate: 256 Hz\n\n";
    summary << "File Name: synth_01.edf\n";
    summary << "Number of Seizures in File: 0\n\n";
    summary << "File Name: synth_02.edf\n";
    summary << "Number of Seizures in File: 1\n";
    summary << "Seizure Start Time: " << static_cast<int>(onset) - dur1 << " seconds\n";
    summary << "Seizure End Time: " << static_cast<int>(end) - dur1 << " seconds\n";
    write_file_atomic(dir / "edf" / "summary.txt", summary.str());

    RunConfig cfg;
    cfg.data_dir = dir / "edf";
    cfg.output_dir = dir / "out";
    cfg.channels = n_channels;
    cfg.clinical.window_seconds = 30.0;
    cfg.clinical.sop_minutes = 6.0;
    cfg.clinical.sph_minutes = 4.0;
    cfg.clinical.interictal_guard_hours = 0.1;
    cfg.training.epochs = 5;
    cfg.training.batch = 16;
    cfg.training.lr = 1e-3;
    cfg.training.folds = 5;
    cfg.sweep.sigmas = {0.0, 100.0};
    cfg.sweep.states = {4};
    cfg.sweep.seeds = 1;
    cfg.sweep.window_seconds = cfg.clinical.window_seconds;
    cfg.seed = seed;
    RunConfig on_disk = cfg;
    on_disk.data_dir = "edf";
    on_disk.output_dir = "out";
    write_file_atomic(dir / "synthetic.ini", on_disk.serialize());
    return cfg;
}

}  // namespace memseize
