#pragma once

#include <string>
#include <vector>

#include "memseize/tensor.hpp"

namespace memseize {

/// Clinical timing parameters. A seizure is predictable inside the
/// occurrence period (SOP) that starts one prediction horizon (SPH)
/// after the alarm.
struct ClinicalWindows {
    double sop_minutes = 30.0;
    double sph_minutes = 35.0;
    double window_seconds = 30.0;
    double interictal_guard_hours = 4.0;

    void validate() const;  // throws std::invalid_argument
};

struct SeizureAnnotation {
    std::string file_id;
    double onset_s = 0.0;  // seconds from file start
    double end_s = 0.0;
};

/// Parses the per-recording summary convention:
///   File Name: <id>
///   Number of Seizures in File: <k>
///   Seizure [i ]Start Time: <n> seconds
///   Seizure [i ]End Time: <n> seconds
/// Throws ParseError (offset = line number) on missing pairs or an end
/// before its start. Annotations are returned in file order, then onset
/// order.
std::vector<SeizureAnnotation> parse_annotations(const std::string& text);

struct Interval {
    double begin_s = 0.0;
    double end_s = 0.0;
};

/// Keeps a seizure iff no earlier seizure (kept or dropped) ended within
/// `sop_minutes` before its onset: only leading seizures are prediction
/// targets. Input must be onset-ordered on a common timeline.
std::vector<Interval> select_leading(const std::vector<Interval>& seizures, double sop_minutes);

enum class WindowClass { Interictal = 0, Preictal = 1 };

struct WindowLabel {
    double offset_s = 0.0;
    WindowClass label = WindowClass::Interictal;
    bool synthetic = false;
};

/// Tiles [0, duration) at stride window_seconds and labels each window.
/// Preictal: fully inside [onset - SPH - SOP, onset - SPH] of a leading
/// seizure. Excluded: anything touching (onset - SPH, end + guard) or the
/// guard interval just before the preictal band. The rest is interictal.
std::vector<WindowLabel> label_windows(double duration_s, const std::vector<Interval>& leading,
                                       const ClinicalWindows& cw);

/// Preictal bands of leading seizures, clipped to [0, duration).
std::vector<Interval> preictal_spans(double duration_s, const std::vector<Interval>& leading,
                                     const ClinicalWindows& cw);

struct BalanceResult {
    double step_s = 0.0;                 // the sliding step S
    std::vector<WindowLabel> windows;    // preictal, offsets in recording time
};

/// Oversamples the preictal spans by sliding a window at step
/// S = (D - t) / (n_interictal - 1) along their concatenated timeline so
/// the class counts match. Window offsets that are not multiples of t in
/// concatenated coordinates are flagged synthetic. Degenerate cases
/// (n_interictal == 1 or total duration <= t) produce one window and
/// report S = t.
BalanceResult balance_overlap(const std::vector<Interval>& spans, int n_interictal,
                              double window_seconds);

/// Magnitude short-time Fourier transform of an n-channel window.
///
/// Per channel: 256-sample segments at hop 128, per-segment mean removal,
/// periodic Hann taper, tail zero-padding so the frame count is exactly
/// samples/hop. Of the 129 magnitude bins, bin 0 and bins 57-63 and
/// 117-123 are dropped (power-line harmonics), leaving 114; values are
/// stored as ln(1 + magnitude). Result shape: channels x frames x 114.
Tensor3 spectrogram(const std::vector<std::vector<double>>& channels, double window_seconds,
                    double sample_rate);

inline constexpr int kSpectrogramBins = 114;
inline constexpr int kStftSegment = 256;
inline constexpr int kStftHop = 128;

/// The retained frequency-bin indices (size 114).
const std::vector<int>& retained_bins();

}  // namespace memseize
