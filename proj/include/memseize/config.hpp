#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "memseize/costmodel.hpp"
#include "memseize/device.hpp"
#include "memseize/eval.hpp"
#include "memseize/preprocess.hpp"
#include "memseize/training.hpp"

namespace memseize {

/// One plain-text config file drives every command. Sections: [paths],
/// [clinical], [device], [hardware], [network], [training], [sweep],
/// [run]. Unknown keys are rejected; `seed` is mandatory.
struct RunConfig {
    std::filesystem::path data_dir, output_dir;
    ClinicalWindows clinical;
    DeviceParameters device;
    HardwareParams hardware;
    TrainingParams training;
    SweepOptions sweep;
    int channels = 22;
    bool fold_batchnorm = false;
    std::uint64_t seed = 0;

    int frames() const;  // window frames derived from the clinical window

    static RunConfig load(const std::filesystem::path& file);  // throws ConfigError
    static RunConfig parse(const std::string& text, const std::filesystem::path& base_dir);

    /// Checks that referenced input paths exist (data_dir only when the
    /// command consumes it). Throws ConfigError.
    void validate_paths(bool need_data) const;

    std::string serialize() const;
};

}  // namespace memseize
