#pragma once

#include <cstdint>
#include <filesystem>

#include "memseize/config.hpp"

namespace memseize {

/// Deterministic fixtures so the full pipeline and test suite run without
/// external downloads.

/// Two-class blob dataset (one channel, 44 frames): each class renders a
/// Gaussian bump at a class-specific time/frequency location over uniform
/// noise. Linearly separable by construction. A fifth of the preictal
/// windows are flagged synthetic. Writes windows.bin/index.csv and
/// returns the matching config.
RunConfig make_toy_dataset(const std::filesystem::path& dir, int n_windows, std::uint64_t seed);

/// Two EDF recordings (4 channels, 256 Hz, 2060 s total) plus a seizure
/// summary. The single seizure at 1650 s leaves 23 interictal windows and
/// a 360 s preictal band whose balancing step is exactly 15 s, so real
/// and synthetic overlap windows both occur. Preictal intervals carry a
/// louder 10 Hz burst, making the labels learnable. Returns the matching
/// config.
RunConfig make_edf_fixtures(const std::filesystem::path& dir, std::uint64_t seed);

}  // namespace memseize
