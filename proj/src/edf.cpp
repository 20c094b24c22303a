#include "memseize/edf.hpp"

#include <cmath>
#include <cstring>
#include <sstream>

#include "memseize/util.hpp"

namespace memseize {

namespace {

constexpr std::size_t kFixedHeader = 256;
constexpr std::size_t kPerSignalHeader = 256;

std::string field(const std::string& bytes, std::size_t off, std::size_t len) {
    return trim(std::string_view(bytes).substr(off, len));
}

double numeric_field(const std::string& bytes, std::size_t off, std::size_t len,
                     const char* what) {
    const std::string text = field(bytes, off, len);
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        throw ParseError(std::string("EDF: malformed ") + what + " field '" + text + "'", off);
    }
}

std::string pad(const std::string& s, std::size_t len) {
    if (s.size() > len) throw std::invalid_argument("EDF field too long: " + s);
    return s + std::string(len - s.size(), ' ');
}

std::string pad_num(double v, std::size_t len) {
    std::ostringstream os;
    if (v == std::floor(v) && std::abs(v) < 1e15)
        os << static_cast<long long>(v);
    else
        os << v;
    return pad(os.str(), len);
}

}  // namespace

EdfFile parse_edf(const std::string& bytes) {
    if (bytes.size() < kFixedHeader)
        throw ParseError("EDF: truncated fixed header", bytes.size());

    EdfFile edf;
    const long long header_bytes =
        static_cast<long long>(numeric_field(bytes, 184, 8, "header byte count"));
    const double n_records = numeric_field(bytes, 236, 8, "record count");
    edf.record_duration = numeric_field(bytes, 244, 8, "record duration");
    const double ns = numeric_field(bytes, 252, 4, "signal count");
    if (ns < 1 || ns != std::floor(ns)) throw ParseError("EDF: bad signal count", 252);
    const std::size_t n_signals = static_cast<std::size_t>(ns);
    if (n_records < 0 || n_records != std::floor(n_records))
        throw ParseError("EDF: inconsistent record count", 236);
    edf.n_records = static_cast<int>(n_records);
    if (edf.record_duration <= 0) throw ParseError("EDF: non-positive record duration", 244);

    const std::size_t full_header = kFixedHeader + n_signals * kPerSignalHeader;
    if (static_cast<std::size_t>(header_bytes) != full_header)
        throw ParseError("EDF: header byte count mismatch", 184);
    if (bytes.size() < full_header)
        throw ParseError("EDF: truncated signal headers", bytes.size());

    edf.raw_header = bytes.substr(0, full_header);
    edf.signals.resize(n_signals);

    // Signal headers are stored field-major: all labels, all transducers, ...
    const struct {
        std::size_t len;
    } widths[] = {{16}, {80}, {8}, {8}, {8}, {8}, {8}, {80}, {8}, {32}};
    std::size_t base = kFixedHeader;
    for (std::size_t f = 0; f < 10; ++f) {
        for (std::size_t s = 0; s < n_signals; ++s) {
            const std::size_t off = base + s * widths[f].len;
            auto& sig = edf.signals[s];
            switch (f) {
                case 0: sig.label = field(bytes, off, 16); break;
                case 1: sig.transducer = field(bytes, off, 80); break;
                case 2: sig.phys_dim = field(bytes, off, 8); break;
                case 3: sig.phys_min = numeric_field(bytes, off, 8, "physical minimum"); break;
                case 4: sig.phys_max = numeric_field(bytes, off, 8, "physical maximum"); break;
                case 5: sig.dig_min = numeric_field(bytes, off, 8, "digital minimum"); break;
                case 6: sig.dig_max = numeric_field(bytes, off, 8, "digital maximum"); break;
                case 7: sig.prefilter = field(bytes, off, 80); break;
                case 8: {
                    const double spr = numeric_field(bytes, off, 8, "samples per record");
                    if (spr < 1 || spr != std::floor(spr))
                        throw ParseError("EDF: bad samples-per-record", off);
                    sig.samples_per_record = static_cast<int>(spr);
                    break;
                }
                default: break;  // reserved
            }
        }
        base += n_signals * widths[f].len;
    }
    for (std::size_t s = 0; s < n_signals; ++s) {
        if (edf.signals[s].dig_max == edf.signals[s].dig_min)
            throw ParseError("EDF: zero digital range for signal " + std::to_string(s),
                             kFixedHeader + n_signals * (16 + 80 + 8 + 8 + 8) + s * 8);
    }

    std::size_t record_len = 0;
    for (const auto& sig : edf.signals)
        record_len += static_cast<std::size_t>(sig.samples_per_record) * 2;
    const std::size_t expected = full_header + record_len * static_cast<std::size_t>(edf.n_records);
    if (bytes.size() != expected)
        throw ParseError("EDF: data length " + std::to_string(bytes.size() - full_header) +
                             " does not match " + std::to_string(edf.n_records) + " records",
                         std::min(bytes.size(), expected));

    edf.samples.resize(n_signals);
    for (std::size_t s = 0; s < n_signals; ++s)
        edf.samples[s].reserve(static_cast<std::size_t>(edf.n_records) *
                               edf.signals[s].samples_per_record);
    std::size_t pos = full_header;
    for (int r = 0; r < edf.n_records; ++r)
        for (std::size_t s = 0; s < n_signals; ++s)
            for (int i = 0; i < edf.signals[s].samples_per_record; ++i) {
                const auto lo = static_cast<std::uint8_t>(bytes[pos]);
                const auto hi = static_cast<std::uint8_t>(bytes[pos + 1]);
                edf.samples[s].push_back(
                    static_cast<std::int16_t>(static_cast<std::uint16_t>(lo | (hi << 8))));
                pos += 2;
            }
    return edf;
}

std::string write_edf(const EdfFile& edf) {
    std::string out = edf.raw_header;
    for (int r = 0; r < edf.n_records; ++r)
        for (std::size_t s = 0; s < edf.signals.size(); ++s) {
            const int spr = edf.signals[s].samples_per_record;
            for (int i = 0; i < spr; ++i) {
                const auto v = static_cast<std::uint16_t>(
                    edf.samples[s][static_cast<std::size_t>(r) * spr + i]);
                out.push_back(static_cast<char>(v & 0xff));
                out.push_back(static_cast<char>((v >> 8) & 0xff));
            }
        }
    return out;
}

EdfFile make_edf(const std::vector<EdfSignalHeader>& signals,
                 const std::vector<std::vector<std::int16_t>>& samples, int n_records,
                 double record_duration) {
    if (signals.size() != samples.size())
        throw std::invalid_argument("make_edf: signal/sample count mismatch");
    for (std::size_t s = 0; s < signals.size(); ++s)
        if (samples[s].size() !=
            static_cast<std::size_t>(n_records) * signals[s].samples_per_record)
            throw std::invalid_argument("make_edf: bad sample count for signal " +
                                        std::to_string(s));

    EdfFile edf;
    edf.n_records = n_records;
    edf.record_duration = record_duration;
    edf.signals = signals;
    edf.samples = samples;

    const std::size_t ns = signals.size();
    std::string h;
    h += pad("0", 8);                                  // version
    h += pad("synthetic", 80);                         // patient id
    h += pad("memseize fixture", 80);                  // recording id
    h += pad("01.01.00", 8);                           // start date
    h += pad("00.00.00", 8);                           // start time
    h += pad_num(static_cast<double>(kFixedHeader + ns * kPerSignalHeader), 8);
    h += pad("", 44);                                  // reserved
    h += pad_num(n_records, 8);
    h += pad_num(record_duration, 8);
    h += pad_num(static_cast<double>(ns), 4);

    auto each = [&](auto&& fn) {
        for (const auto& sig : signals) h += fn(sig);
    };
    each([](const EdfSignalHeader& s) { return pad(s.label, 16); });
    each([](const EdfSignalHeader& s) { return pad(s.transducer, 80); });
    each([](const EdfSignalHeader& s) { return pad(s.phys_dim, 8); });
    each([](const EdfSignalHeader& s) { return pad_num(s.phys_min, 8); });
    each([](const EdfSignalHeader& s) { return pad_num(s.phys_max, 8); });
    each([](const EdfSignalHeader& s) { return pad_num(s.dig_min, 8); });
    each([](const EdfSignalHeader& s) { return pad_num(s.dig_max, 8); });
    each([](const EdfSignalHeader& s) { return pad(s.prefilter, 80); });
    each([](const EdfSignalHeader& s) { return pad_num(s.samples_per_record, 8); });
    each([](const EdfSignalHeader&) { return pad("", 32); });

    edf.raw_header = std::move(h);
    return edf;
}

EegRecord to_eeg_record(const EdfFile& edf) {
    EegRecord rec;
    rec.n_channels = static_cast<int>(edf.signals.size());
    rec.duration_s = edf.duration_s();
    rec.raw = edf.samples;
    for (const auto& sig : edf.signals) {
        const double rate = sig.samples_per_record / edf.record_duration;
        if (rec.sample_rate == 0.0)
            rec.sample_rate = rate;
        else if (rate != rec.sample_rate)
            throw std::runtime_error("EDF: signals disagree on sample rate");
        const double s = (sig.phys_max - sig.phys_min) / (sig.dig_max - sig.dig_min);
        rec.scale.push_back(s);
        rec.offset.push_back(sig.phys_min - sig.dig_min * s);
    }
    return rec;
}

}  // namespace memseize
