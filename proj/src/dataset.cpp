#include "memseize/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>

#include "memseize/edf.hpp"
#include "memseize/util.hpp"

namespace memseize {

namespace fs = std::filesystem;

Tensor3 Dataset::window(std::size_t i) const {
    Tensor3 t(channels, frames, bins);
    const std::size_t n = window_values();
    const float* src = data.data() + i * n;
    for (std::size_t k = 0; k < n; ++k) t.data[k] = static_cast<double>(src[k]);
    return t;
}

std::vector<int> Dataset::labels() const {
    std::vector<int> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i)
        out[i] = index[i].label == WindowClass::Preictal ? 1 : 0;
    return out;
}

std::vector<bool> Dataset::synthetic_flags() const {
    std::vector<bool> out(index.size());
    for (std::size_t i = 0; i < index.size(); ++i) out[i] = index[i].synthetic;
    return out;
}

void save_dataset(const fs::path& dir, const Dataset& ds) {
    fs::create_directories(dir);
    std::ostringstream idx;
    idx << "id,source,offset_seconds,label,synthetic\n";
    for (std::size_t i = 0; i < ds.index.size(); ++i) {
        const auto& w = ds.index[i];
        idx << i << ',' << w.source << ',' << format_double(w.offset_s) << ','
            << (w.label == WindowClass::Preictal ? "preictal" : "interictal") << ','
            << (w.synthetic ? 1 : 0) << '\n';
    }
    write_file_atomic(dir / "index.csv", idx.str());
    write_binary_atomic(dir / "windows.bin", ds.data.data(), ds.data.size() * sizeof(float));
}

Dataset load_dataset(const fs::path& dir, int channels, int frames) {
    Dataset ds;
    ds.channels = channels;
    ds.frames = frames;

    const std::string idx = read_file(dir / "index.csv");
    std::istringstream lines(idx);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        if (trim(line).empty()) continue;
        const auto parts = split(line, ',');
        if (parts.size() != 5) throw std::runtime_error("index.csv: malformed row: " + line);
        DatasetWindow w;
        w.source = parts[1];
        w.offset_s = std::stod(parts[2]);
        w.label = parts[3] == "preictal" ? WindowClass::Preictal : WindowClass::Interictal;
        w.synthetic = parts[4] == "1";
        ds.index.push_back(std::move(w));
    }

    const std::string blob = read_file(dir / "windows.bin");
    const std::size_t expected = ds.index.size() * ds.window_values() * sizeof(float);
    if (blob.size() != expected)
        throw std::runtime_error("windows.bin: size " + std::to_string(blob.size()) +
                                 " does not match index (" + std::to_string(expected) +
                                 " bytes expected for " + std::to_string(channels) + "x" +
                                 std::to_string(frames) + "x" + std::to_string(ds.bins) + ")");
    ds.data.resize(blob.size() / sizeof(float));
    std::memcpy(ds.data.data(), blob.data(), blob.size());
    return ds;
}

namespace {

struct Timeline {
    std::vector<std::string> file_names;
    std::vector<double> file_offsets;  // cumulative start of each file
    EegRecord merged;                  // all channels concatenated across files
    double total_s = 0.0;

    const std::string& file_at(double t) const {
        std::size_t i = 0;
        while (i + 1 < file_offsets.size() && t >= file_offsets[i + 1]) ++i;
        return file_names[i];
    }
};

Timeline load_timeline(const std::vector<fs::path>& edf_files) {
    Timeline tl;
    for (const auto& path : edf_files) {
        const EdfFile edf = parse_edf(read_file(path));
        const EegRecord rec = to_eeg_record(edf);
        if (tl.merged.n_channels == 0) {
            tl.merged = rec;
        } else {
            if (rec.n_channels != tl.merged.n_channels)
                throw std::runtime_error(path.string() + ": channel count differs");
            if (rec.sample_rate != tl.merged.sample_rate)
                throw std::runtime_error(path.string() + ": sample rate differs");
            for (int c = 0; c < rec.n_channels; ++c) {
                auto& dst = tl.merged.raw[static_cast<std::size_t>(c)];
                const auto& src = rec.raw[static_cast<std::size_t>(c)];
                dst.insert(dst.end(), src.begin(), src.end());
                // Per-file calibration differences are not supported; the
                // synthetic fixtures and CHB-MIT use one calibration.
                if (rec.scale[static_cast<std::size_t>(c)] !=
                        tl.merged.scale[static_cast<std::size_t>(c)] ||
                    rec.offset[static_cast<std::size_t>(c)] !=
                        tl.merged.offset[static_cast<std::size_t>(c)])
                    throw std::runtime_error(path.string() + ": calibration differs");
            }
        }
        tl.file_names.push_back(path.filename().string());
        tl.file_offsets.push_back(tl.total_s);
        tl.total_s += rec.duration_s;
    }
    tl.merged.duration_s = tl.total_s;
    return tl;
}

std::vector<std::vector<double>> extract_window(const EegRecord& rec, double offset_s,
                                                double window_s) {
    const auto start = static_cast<std::size_t>(std::llround(offset_s * rec.sample_rate));
    const auto count = static_cast<std::size_t>(std::llround(window_s * rec.sample_rate));
    std::vector<std::vector<double>> out(static_cast<std::size_t>(rec.n_channels));
    for (int c = 0; c < rec.n_channels; ++c) {
        auto& ch = out[static_cast<std::size_t>(c)];
        ch.resize(count);
        const auto& raw = rec.raw[static_cast<std::size_t>(c)];
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t idx = start + i;
            ch[i] = idx < raw.size() ? rec.physical(c, idx) : 0.0;
        }
    }
    return out;
}

}  // namespace

BuildStats build_dataset(const std::vector<fs::path>& edf_files, const std::string& summary_text,
                         const ClinicalWindows& cw, const fs::path& out_dir) {
    cw.validate();
    if (edf_files.empty()) throw std::runtime_error("build_dataset: no recordings");
    const Timeline tl = load_timeline(edf_files);

    // Map per-file annotations onto the concatenated timeline.
    std::map<std::string, double> offset_by_file;
    for (std::size_t i = 0; i < tl.file_names.size(); ++i)
        offset_by_file[tl.file_names[i]] = tl.file_offsets[i];
    std::vector<Interval> seizures;
    for (const auto& ann : parse_annotations(summary_text)) {
        const auto it = offset_by_file.find(ann.file_id);
        if (it == offset_by_file.end())
            throw std::runtime_error("annotations reference unknown file " + ann.file_id);
        seizures.push_back({it->second + ann.onset_s, it->second + ann.end_s});
    }
    std::sort(seizures.begin(), seizures.end(),
              [](const Interval& a, const Interval& b) { return a.begin_s < b.begin_s; });

    const std::vector<Interval> leading = select_leading(seizures, cw.sop_minutes);
    std::vector<WindowLabel> windows = label_windows(tl.total_s, leading, cw);

    BuildStats stats;
    stats.no_seizures = leading.empty();
    std::vector<WindowLabel> final_windows;
    int n_interictal = 0;
    for (const auto& w : windows)
        if (w.label == WindowClass::Interictal) {
            final_windows.push_back(w);
            ++n_interictal;
        }
    const std::vector<Interval> spans = preictal_spans(tl.total_s, leading, cw);
    if (!spans.empty() && n_interictal > 0) {
        const BalanceResult bal = balance_overlap(spans, n_interictal, cw.window_seconds);
        stats.step_s = bal.step_s;
        for (const auto& w : bal.windows) final_windows.push_back(w);
    } else if (!spans.empty()) {
        for (const auto& w : windows)
            if (w.label == WindowClass::Preictal) final_windows.push_back(w);
    }
    std::stable_sort(final_windows.begin(), final_windows.end(),
                     [](const WindowLabel& a, const WindowLabel& b) {
                         if (a.offset_s != b.offset_s) return a.offset_s < b.offset_s;
                         return static_cast<int>(a.label) < static_cast<int>(b.label);
                     });

    Dataset ds;
    ds.channels = tl.merged.n_channels;
    ds.frames = static_cast<int>(std::llround(cw.window_seconds * tl.merged.sample_rate)) /
                kStftHop;
    for (const auto& w : final_windows) {
        const auto chans = extract_window(tl.merged, w.offset_s, cw.window_seconds);
        const Tensor3 spec = spectrogram(chans, cw.window_seconds, tl.merged.sample_rate);
        for (double v : spec.data) ds.data.push_back(static_cast<float>(v));
        DatasetWindow dw;
        dw.source = tl.file_at(w.offset_s);
        dw.offset_s = w.offset_s;
        dw.label = w.label;
        dw.synthetic = w.synthetic;
        ds.index.push_back(std::move(dw));
        if (w.label == WindowClass::Preictal) {
            ++stats.n_preictal;
            if (w.synthetic) ++stats.n_synthetic;
        } else {
            ++stats.n_interictal;
        }
    }
    save_dataset(out_dir, ds);
    return stats;
}

}  // namespace memseize
