#include "memseize/device.hpp"

#include <algorithm>
#include <stdexcept>

namespace memseize {

void DeviceParameters::validate() const {
    if (r_on_mean <= 0.0) throw std::invalid_argument("r_on_mean must be positive");
    if (r_off_mean <= r_on_mean)
        throw std::invalid_argument("r_off_mean must exceed r_on_mean");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
    if (n_states != kContinuousStates && n_states < 2)
        throw std::invalid_argument("n_states must be >= 2 or continuous");
    if (r_min <= 0.0) throw std::invalid_argument("r_min must be positive");
}

DeviceInstance sample_device(const DeviceParameters& params, Rng& rng) {
    params.validate();
    DeviceInstance dev;
    dev.r_on = std::max(params.r_min, rng.next_normal(params.r_on_mean, params.sigma));
    dev.r_off = std::max(params.r_min, rng.next_normal(params.r_off_mean, 2.0 * params.sigma));
    dev.states = build_states(dev.r_on, dev.r_off, params.n_states);
    return dev;
}

std::vector<double> build_states(double r_on, double r_off, int n_states) {
    if (n_states == kContinuousStates) return {};
    if (n_states < 2) throw std::invalid_argument("n_states must be >= 2 or continuous");
    const double g_off = 1.0 / r_off;
    const double g_on = 1.0 / r_on;
    if (r_on == r_off) return {g_on};
    if (r_on > r_off) {
        // Overlapped sample: the range inverted, keep the sorted endpoints.
        return {g_on, g_off};
    }
    std::vector<double> states(static_cast<std::size_t>(n_states));
    const double step = (g_on - g_off) / static_cast<double>(n_states - 1);
    for (int i = 0; i < n_states; ++i) states[static_cast<std::size_t>(i)] = g_off + step * i;
    states.front() = g_off;
    states.back() = g_on;
    return states;
}

double quantize(double g, const DeviceInstance& dev) {
    if (dev.states.empty()) return std::clamp(g, dev.g_lo(), dev.g_hi());
    const auto& s = dev.states;
    if (g <= s.front()) return s.front();
    if (g >= s.back()) return s.back();
    auto hi = std::lower_bound(s.begin(), s.end(), g);
    if (*hi == g) return g;
    auto lo = hi - 1;
    // Midpoint comparison; <= sends exact ties to the lower state.
    const double mid = 0.5 * (*lo + *hi);
    return g <= mid ? *lo : *hi;
}

double mirror_offset(double r_on_mean, double r_off_mean) {
    if (r_on_mean <= 0.0 || r_off_mean <= 0.0)
        throw std::invalid_argument("mirror_offset requires positive resistances");
    return -2.0 / (r_on_mean + r_off_mean);
}

}  // namespace memseize
