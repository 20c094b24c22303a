#include "memseize/preprocess.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "memseize/util.hpp"

namespace memseize {

void ClinicalWindows::validate() const {
    if (sop_minutes <= 0 || sph_minutes <= 0 || window_seconds <= 0 ||
        interictal_guard_hours <= 0)
        throw std::invalid_argument("clinical windows: all parameters must be positive");
}

std::vector<SeizureAnnotation> parse_annotations(const std::string& text) {
    std::vector<SeizureAnnotation> out;
    std::istringstream lines(text);
    std::string line;
    std::size_t line_no = 0;
    std::string current_file;
    double pending_start = -1.0;
    std::size_t pending_line = 0;

    auto value_after_colon = [&](const std::string& l) -> std::string {
        const auto pos = l.find(':');
        if (pos == std::string::npos)
            throw ParseError("annotations: missing ':' in line '" + l + "'", line_no);
        return trim(l.substr(pos + 1));
    };
    auto seconds_value = [&](const std::string& l) -> double {
        std::string v = value_after_colon(l);
        if (v.size() >= 7 && v.substr(v.size() - 7) == "seconds") v = trim(v.substr(0, v.size() - 7));
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ParseError("annotations: bad time value in line '" + l + "'", line_no);
        }
    };
    auto is_start = [](const std::string& l) {
        return l.rfind("Seizure", 0) == 0 && l.find("Start Time") != std::string::npos;
    };
    auto is_end = [](const std::string& l) {
        return l.rfind("Seizure", 0) == 0 && l.find("End Time") != std::string::npos;
    };

    while (std::getline(lines, line)) {
        ++line_no;
        const std::string l = trim(line);
        if (l.empty()) continue;
        if (l.rfind("File Name", 0) == 0) {
            if (pending_start >= 0.0)
                throw ParseError("annotations: seizure start without end", pending_line);
            current_file = value_after_colon(l);
        } else if (is_start(l)) {
            if (pending_start >= 0.0)
                throw ParseError("annotations: seizure start without end", pending_line);
            if (current_file.empty())
                throw ParseError("annotations: seizure before any 'File Name'", line_no);
            pending_start = seconds_value(l);
            pending_line = line_no;
        } else if (is_end(l)) {
            if (pending_start < 0.0)
                throw ParseError("annotations: seizure end without start", line_no);
            const double end = seconds_value(l);
            if (end <= pending_start)
                throw ParseError("annotations: seizure end before start", line_no);
            out.push_back({current_file, pending_start, end});
            pending_start = -1.0;
        }
    }
    if (pending_start >= 0.0)
        throw ParseError("annotations: seizure start without end", pending_line);
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.file_id == b.file_id ? a.onset_s < b.onset_s : false;
    });
    return out;
}

std::vector<Interval> select_leading(const std::vector<Interval>& seizures, double sop_minutes) {
    std::vector<Interval> kept;
    const double gap = sop_minutes * 60.0;
    double last_end = -std::numeric_limits<double>::infinity();
    for (const auto& s : seizures) {
        if (s.begin_s - last_end > gap) kept.push_back(s);
        last_end = std::max(last_end, s.end_s);
    }
    return kept;
}

namespace {

struct Zones {
    std::vector<Interval> preictal;
    std::vector<Interval> excluded;
};

Zones clinical_zones(const std::vector<Interval>& leading, const ClinicalWindows& cw) {
    Zones z;
    const double sph = cw.sph_minutes * 60.0;
    const double sop = cw.sop_minutes * 60.0;
    const double guard = cw.interictal_guard_hours * 3600.0;
    for (const auto& s : leading) {
        const double band_end = s.begin_s - sph;
        const double band_begin = band_end - sop;
        z.preictal.push_back({band_begin, band_end});
        z.excluded.push_back({band_begin - guard, band_begin});
        z.excluded.push_back({band_end, s.end_s + guard});
    }
    return z;
}

bool inside(const Interval& w, const Interval& zone) {
    return w.begin_s >= zone.begin_s && w.end_s <= zone.end_s;
}

bool intersects_open(const Interval& w, const Interval& zone) {
    return w.end_s > zone.begin_s && w.begin_s < zone.end_s;
}

}  // namespace

std::vector<WindowLabel> label_windows(double duration_s, const std::vector<Interval>& leading,
                                       const ClinicalWindows& cw) {
    cw.validate();
    const Zones z = clinical_zones(leading, cw);
    const double t = cw.window_seconds;
    std::vector<WindowLabel> out;
    for (double off = 0.0; off + t <= duration_s + 1e-9; off += t) {
        const Interval w{off, off + t};
        bool preictal = false;
        for (const auto& band : z.preictal) preictal = preictal || inside(w, band);
        if (preictal) {
            out.push_back({off, WindowClass::Preictal, false});
            continue;
        }
        bool excluded = false;
        for (const auto& zone : z.excluded) excluded = excluded || intersects_open(w, zone);
        for (const auto& band : z.preictal)
            excluded = excluded || (intersects_open(w, band) && !inside(w, band));
        if (!excluded) out.push_back({off, WindowClass::Interictal, false});
    }
    return out;
}

std::vector<Interval> preictal_spans(double duration_s, const std::vector<Interval>& leading,
                                     const ClinicalWindows& cw) {
    std::vector<Interval> spans;
    for (const auto& band : clinical_zones(leading, cw).preictal) {
        const double b = std::max(0.0, band.begin_s);
        const double e = std::min(duration_s, band.end_s);
        if (e > b) spans.push_back({b, e});
    }
    return spans;
}

BalanceResult balance_overlap(const std::vector<Interval>& spans, int n_interictal,
                              double window_seconds) {
    if (spans.empty()) return {};
    if (n_interictal < 1) throw std::invalid_argument("balance_overlap: need >= 1 target count");
    const double t = window_seconds;
    double total = 0.0;
    for (const auto& s : spans) total += s.end_s - s.begin_s;

    BalanceResult r;
    int count = n_interictal;
    if (total <= t || n_interictal == 1) {
        r.step_s = t;
        count = 1;
    } else {
        r.step_s = (total - t) / static_cast<double>(n_interictal - 1);
    }

    // Offsets live on the concatenated preictal timeline; map each back
    // into a span, shifting left when a window would straddle a boundary.
    for (int k = 0; k < count; ++k) {
        const double u = (count == 1) ? 0.0 : r.step_s * k;
        double remaining = u;
        double abs_off = spans.back().end_s - t;
        for (const auto& s : spans) {
            const double len = s.end_s - s.begin_s;
            if (remaining < len - 1e-9 || &s == &spans.back()) {
                abs_off = s.begin_s + std::min(remaining, std::max(0.0, len - t));
                if (abs_off + t > s.end_s + 1e-9)
                    abs_off = std::max(s.begin_s, s.end_s - t);
                break;
            }
            remaining -= len;
        }
        const double ratio = u / t;
        const bool synthetic = std::abs(ratio - std::round(ratio)) > 1e-9;
        r.windows.push_back({abs_off, WindowClass::Preictal, synthetic});
    }
    return r;
}

const std::vector<int>& retained_bins() {
    static const std::vector<int> bins = [] {
        std::vector<int> b;
        for (int k = 1; k <= kStftSegment / 2; ++k) {
            if (k >= 57 && k <= 63) continue;
            if (k >= 117 && k <= 123) continue;
            b.push_back(k);
        }
        return b;
    }();
    return bins;
}

Tensor3 spectrogram(const std::vector<std::vector<double>>& channels, double window_seconds,
                    double sample_rate) {
    if (channels.empty()) throw std::invalid_argument("spectrogram: no channels");
    const std::size_t len = channels[0].size();
    const auto expected = static_cast<std::size_t>(std::llround(window_seconds * sample_rate));
    if (len != expected)
        throw std::invalid_argument("spectrogram: window length " + std::to_string(len) +
                                    " != t*fs = " + std::to_string(expected));
    if (len % kStftHop != 0 || len < kStftSegment)
        throw std::invalid_argument("spectrogram: window length must be a multiple of the hop");
    for (const auto& ch : channels)
        if (ch.size() != len) throw std::invalid_argument("spectrogram: ragged channels");

    const int frames = static_cast<int>(len / kStftHop);
    const auto& bins = retained_bins();
    Tensor3 out(static_cast<int>(channels.size()), frames, kSpectrogramBins);

    // Periodic Hann taper.
    std::array<double, kStftSegment> hann{};
    for (int i = 0; i < kStftSegment; ++i)
        hann[static_cast<std::size_t>(i)] =
            0.5 - 0.5 * std::cos(2.0 * M_PI * i / static_cast<double>(kStftSegment));

    Eigen::FFT<double> fft;
    std::vector<double> seg(kStftSegment);
    std::vector<std::complex<double>> spec(kStftSegment);
    for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& x = channels[c];
        for (int f = 0; f < frames; ++f) {
            const std::size_t start = static_cast<std::size_t>(f) * kStftHop;
            double mean = 0.0;
            int have = 0;
            for (int i = 0; i < kStftSegment; ++i) {
                const std::size_t idx = start + static_cast<std::size_t>(i);
                seg[static_cast<std::size_t>(i)] = idx < len ? x[idx] : 0.0;
                if (idx < len) {
                    mean += seg[static_cast<std::size_t>(i)];
                    ++have;
                }
            }
            mean /= have > 0 ? have : 1;
            for (int i = 0; i < kStftSegment; ++i) {
                const std::size_t idx = start + static_cast<std::size_t>(i);
                const double v = idx < len ? seg[static_cast<std::size_t>(i)] - mean : 0.0;
                seg[static_cast<std::size_t>(i)] = v * hann[static_cast<std::size_t>(i)];
            }
            fft.fwd(spec, seg);
            for (int b = 0; b < kSpectrogramBins; ++b)
                out.at(static_cast<int>(c), f, b) =
                    std::log1p(std::abs(spec[static_cast<std::size_t>(bins[static_cast<std::size_t>(b)])]));
        }
    }
    return out;
}

}  // namespace memseize
