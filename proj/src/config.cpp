#include "memseize/config.hpp"

#include <cmath>
#include <sstream>

#include "memseize/util.hpp"

namespace memseize {

namespace fs = std::filesystem;

namespace {

int parse_states(const std::string& v, const std::string& key) {
    if (v == "continuous") return kContinuousStates;
    try {
        return std::stoi(v);
    } catch (const std::exception&) {
        throw ConfigError("config: bad value for " + key + ": " + v);
    }
}

double parse_num(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError("config: bad numeric value for " + key + ": " + v);
    }
}

long parse_int(const std::string& v, const std::string& key) {
    const double d = parse_num(v, key);
    if (d != std::floor(d)) throw ConfigError("config: expected integer for " + key);
    return static_cast<long>(d);
}

}  // namespace

int RunConfig::frames() const {
    // frame count = window samples / stft hop (256 Hz recordings)
    return static_cast<int>(std::llround(clinical.window_seconds * 256.0)) / kStftHop;
}

RunConfig RunConfig::parse(const std::string& text, const fs::path& base_dir) {
    RunConfig cfg;
    bool seed_seen = false;
    std::string section;
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
        const std::string l = trim(line);
        if (l.empty() || l[0] == '#' || l[0] == ';') continue;
        if (l.front() == '[' && l.back() == ']') {
            section = trim(l.substr(1, l.size() - 2));
            continue;
        }
        const auto eq = l.find('=');
        if (eq == std::string::npos) throw ConfigError("config: expected key = value: " + l);
        const std::string key = trim(l.substr(0, eq));
        const std::string value = trim(l.substr(eq + 1));
        const std::string qual = section + "." + key;

        if (qual == "paths.data_dir")
            cfg.data_dir = value.empty() ? fs::path() : base_dir / value;
        else if (qual == "paths.output_dir")
            cfg.output_dir = value.empty() ? fs::path() : base_dir / value;
        else if (qual == "clinical.sop_minutes")
            cfg.clinical.sop_minutes = parse_num(value, qual);
        else if (qual == "clinical.sph_minutes")
            cfg.clinical.sph_minutes = parse_num(value, qual);
        else if (qual == "clinical.window_seconds")
            cfg.clinical.window_seconds = parse_num(value, qual);
        else if (qual == "clinical.interictal_guard_hours")
            cfg.clinical.interictal_guard_hours = parse_num(value, qual);
        else if (qual == "device.r_on")
            cfg.device.r_on_mean = parse_num(value, qual);
        else if (qual == "device.r_off")
            cfg.device.r_off_mean = parse_num(value, qual);
        else if (qual == "device.sigma")
            cfg.device.sigma = parse_num(value, qual);
        else if (qual == "device.states")
            cfg.device.n_states = parse_states(value, qual);
        else if (qual == "device.r_min")
            cfg.device.r_min = parse_num(value, qual);
        else if (qual == "hardware.adc_area_mm2")
            cfg.hardware.adc_area_mm2 = parse_num(value, qual);
        else if (qual == "hardware.adc_power_w")
            cfg.hardware.adc_power_w = parse_num(value, qual);
        else if (qual == "hardware.adc_rate_hz")
            cfg.hardware.adc_rate_hz = parse_num(value, qual);
        else if (qual == "hardware.cell_area_mm2")
            cfg.hardware.cell_area_mm2 = parse_num(value, qual);
        else if (qual == "hardware.read_voltage")
            cfg.hardware.read_voltage = parse_num(value, qual);
        else if (qual == "hardware.r_avg_ohm")
            cfg.hardware.r_avg_ohm = parse_num(value, qual);
        else if (qual == "hardware.tile_rows")
            cfg.hardware.tile.rows = static_cast<int>(parse_int(value, qual));
        else if (qual == "hardware.tile_cols")
            cfg.hardware.tile.cols = static_cast<int>(parse_int(value, qual));
        else if (qual == "network.channels")
            cfg.channels = static_cast<int>(parse_int(value, qual));
        else if (qual == "network.fold_batchnorm")
            cfg.fold_batchnorm = value == "true" || value == "1";
        else if (qual == "training.epochs")
            cfg.training.epochs = static_cast<int>(parse_int(value, qual));
        else if (qual == "training.batch")
            cfg.training.batch = static_cast<int>(parse_int(value, qual));
        else if (qual == "training.lr")
            cfg.training.lr = parse_num(value, qual);
        else if (qual == "training.folds")
            cfg.training.folds = static_cast<int>(parse_int(value, qual));
        else if (qual == "sweep.sigmas") {
            cfg.sweep.sigmas.clear();
            for (const auto& part : split(value, ','))
                cfg.sweep.sigmas.push_back(parse_num(trim(part), qual));
        } else if (qual == "sweep.states") {
            cfg.sweep.states.clear();
            for (const auto& part : split(value, ','))
                cfg.sweep.states.push_back(parse_states(trim(part), qual));
        } else if (qual == "sweep.seeds")
            cfg.sweep.seeds = static_cast<int>(parse_int(value, qual));
        else if (qual == "sweep.scheme") {
            if (value == "double")
                cfg.sweep.scheme = WeightScheme::DoubleColumn;
            else if (value == "single")
                cfg.sweep.scheme = WeightScheme::SingleColumn;
            else
                throw ConfigError("config: scheme must be 'double' or 'single'");
        } else if (qual == "sweep.jobs")
            cfg.sweep.jobs = static_cast<int>(parse_int(value, qual));
        else if (qual == "run.seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_int(value, qual));
            seed_seen = true;
        } else
            throw ConfigError("config: unknown key '" + qual + "'");
    }
    if (!seed_seen) throw ConfigError("config: [run] seed is mandatory");
    cfg.sweep.tile = cfg.hardware.tile;
    cfg.sweep.window_seconds = cfg.clinical.window_seconds;
    try {
        cfg.clinical.validate();
        cfg.device.validate();
        cfg.hardware.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

RunConfig RunConfig::load(const fs::path& file) {
    std::string text;
    try {
        text = read_file(file);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse(text, file.has_parent_path() ? file.parent_path() : fs::path("."));
}

void RunConfig::validate_paths(bool need_data) const {
    if (need_data) {
        if (data_dir.empty()) throw ConfigError("config: [paths] data_dir is required");
        if (!fs::exists(data_dir))
            throw ConfigError("config: data_dir does not exist: " + data_dir.string());
    }
    if (output_dir.empty()) throw ConfigError("config: [paths] output_dir is required");
}

std::string RunConfig::serialize() const {
    std::ostringstream os;
    os << "[paths]\n";
    os << "data_dir = " << data_dir.string() << "\n";
    os << "output_dir = " << output_dir.string() << "\n\n";
    os << "[clinical]\n";
    os << "sop_minutes = " << format_double(clinical.sop_minutes) << "\n";
    os << "sph_minutes = " << format_double(clinical.sph_minutes) << "\n";
    os << "window_seconds = " << format_double(clinical.window_seconds) << "\n";
    os << "interictal_guard_hours = " << format_double(clinical.interictal_guard_hours)
       << "\n\n";
    os << "[device]\n";
    os << "r_on = " << format_double(device.r_on_mean) << "\n";
    os << "r_off = " << format_double(device.r_off_mean) << "\n";
    os << "sigma = " << format_double(device.sigma) << "\n";
    os << "states = "
       << (device.n_states == kContinuousStates ? "continuous" : std::to_string(device.n_states))
       << "\n";
    os << "r_min = " << format_double(device.r_min) << "\n\n";
    os << "[hardware]\n";
    os << "adc_area_mm2 = " << format_double(hardware.adc_area_mm2) << "\n";
    os << "adc_power_w = " << format_double(hardware.adc_power_w) << "\n";
    os << "adc_rate_hz = " << format_double(hardware.adc_rate_hz) << "\n";
    os << "cell_area_mm2 = " << format_double(hardware.cell_area_mm2) << "\n";
    os << "read_voltage = " << format_double(hardware.read_voltage) << "\n";
    os << "r_avg_ohm = " << format_double(hardware.r_avg_ohm) << "\n";
    os << "tile_rows = " << hardware.tile.rows << "\n";
    os << "tile_cols = " << hardware.tile.cols << "\n\n";
    os << "[network]\n";
    os << "channels = " << channels << "\n\n";
    os << "[training]\n";
    os << "epochs = " << training.epochs << "\n";
    os << "batch = " << training.batch << "\n";
    os << "lr = " << format_double(training.lr) << "\n";
    os << "folds = " << training.folds << "\n\n";
    os << "[sweep]\n";
    os << "sigmas = ";
    for (std::size_t i = 0; i < sweep.sigmas.size(); ++i)
        os << (i ? "," : "") << format_double(sweep.sigmas[i]);
    os << "\nstates = ";
    for (std::size_t i = 0; i < sweep.states.size(); ++i)
        os << (i ? "," : "")
           << (sweep.states[i] == kContinuousStates ? "continuous"
                                                    : std::to_string(sweep.states[i]));
    os << "\nseeds = " << sweep.seeds << "\n";
    os << "scheme = " << (sweep.scheme == WeightScheme::DoubleColumn ? "double" : "single")
       << "\n\n";
    os << "[run]\n";
    os << "seed = " << seed << "\n";
    return os.str();
}

}  // namespace memseize
