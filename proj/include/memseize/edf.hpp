#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace memseize {

// EDF: 256-byte fixed header, 256 bytes of header per signal, then data
// records of little-endian two's-complement 16-bit samples.

struct EdfSignalHeader {
    std::string label, transducer, phys_dim, prefilter;
    double phys_min = 0.0, phys_max = 0.0;
    double dig_min = 0.0, dig_max = 0.0;
    int samples_per_record = 0;
};

struct EdfFile {
    // Exact header bytes; re-serialization emits them verbatim so
    // parse/write round-trips are byte-identical.
    std::string raw_header;
    int n_records = 0;
    double record_duration = 0.0;  // seconds
    std::vector<EdfSignalHeader> signals;
    std::vector<std::vector<std::int16_t>> samples;  // per signal, concatenated

    double duration_s() const { return n_records * record_duration; }
};

/// Throws ParseError (with byte offset) on truncation, malformed numeric
/// fields, inconsistent record counts or zero digital range.
EdfFile parse_edf(const std::string& bytes);

std::string write_edf(const EdfFile& edf);

/// Builds a canonical EDF from scratch (fixture generation). All signals
/// share the record duration; `samples[ch]` length must equal
/// n_records * samples_per_record.
EdfFile make_edf(const std::vector<EdfSignalHeader>& signals,
                 const std::vector<std::vector<std::int16_t>>& samples, int n_records,
                 double record_duration);

/// Calibrated view of an EDF: physical value =
/// (digital - dig_min) * (phys_max - phys_min) / (dig_max - dig_min) + phys_min.
struct EegRecord {
    int n_channels = 0;
    double sample_rate = 0.0;  // Hz, common to all channels
    double duration_s = 0.0;
    std::vector<std::vector<std::int16_t>> raw;  // per channel
    std::vector<double> scale, offset;           // per channel calibration

    double physical(int ch, std::size_t i) const {
        return raw[static_cast<std::size_t>(ch)][i] * scale[static_cast<std::size_t>(ch)] +
               offset[static_cast<std::size_t>(ch)];
    }
    std::size_t samples_per_channel() const { return raw.empty() ? 0 : raw[0].size(); }
};

/// Requires a uniform sample rate across signals.
EegRecord to_eeg_record(const EdfFile& edf);

}  // namespace memseize
