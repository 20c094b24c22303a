#pragma once

#include <vector>

#include "memseize/rng.hpp"

namespace memseize {

/// Sentinel for "no quantization": the device keeps a continuous
/// conductance range instead of discrete states.
inline constexpr int kContinuousStates = 0;

/// Statistical description of one device population.
///
/// R_ON draws use `sigma` as standard deviation, R_OFF draws use
/// 2*sigma (the off-resistance is an order of magnitude larger).
struct DeviceParameters {
    double r_on_mean = 100.0;    // ohm
    double r_off_mean = 2500.0;  // ohm
    double sigma = 0.0;          // ohm, 0..500 in practice
    int n_states = kContinuousStates;  // >= 2, or kContinuousStates
    double r_min = 1.0;          // clamp floor for sampled resistances

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// One sampled device: its resistance pair plus the permitted
/// conductance states (empty when continuous).
struct DeviceInstance {
    double r_on = 0.0;
    double r_off = 0.0;
    std::vector<double> states;  // strictly increasing; empty = continuous

    double g_lo() const { return 1.0 / (r_on > r_off ? r_on : r_off); }
    double g_hi() const { return 1.0 / (r_on < r_off ? r_on : r_off); }
};

/// Draws R_ON ~ N(r_on_mean, sigma^2) and R_OFF ~ N(r_off_mean, (2 sigma)^2),
/// clamping each to r_min. Negative draws are clamped, never resampled, so
/// the overlap probability of the two distributions is preserved. The same
/// rng state always yields the identical instance (r_on drawn first).
DeviceInstance sample_device(const DeviceParameters& params, Rng& rng);

/// `n_states` conductances uniformly spaced between 1/r_off and 1/r_on.
/// A device whose sampled r_on >= r_off has lost its usable range: the
/// list degenerates to the sorted endpoint pair (a single value when equal).
/// kContinuousStates yields an empty list.
std::vector<double> build_states(double r_on, double r_off, int n_states);

/// Projects g onto the device's nearest permitted state; exact midpoints
/// resolve toward the lower state. Continuous devices clamp to [g_lo, g_hi].
double quantize(double g, const DeviceInstance& dev);

/// Fixed current-mirror offset for the single-column scheme:
/// the negated conductance of a cell at the mean resistance,
/// -2 / (r_on_mean + r_off_mean). Throws on non-positive resistances.
double mirror_offset(double r_on_mean, double r_off_mean);

}  // namespace memseize
