#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "memseize/preprocess.hpp"
#include "memseize/tensor.hpp"

namespace memseize {

struct DatasetWindow {
    std::string source;      // originating recording file
    double offset_s = 0.0;   // window start on the concatenated timeline
    WindowClass label = WindowClass::Interictal;
    bool synthetic = false;
};

/// Spectrogram windows plus their index. Pixel data is float32 on disk
/// (windows.bin, row-major channels x frames x bins per window) with one
/// index.csv row per window.
struct Dataset {
    int channels = 0, frames = 0, bins = kSpectrogramBins;
    std::vector<DatasetWindow> index;
    std::vector<float> data;

    std::size_t window_values() const {
        return static_cast<std::size_t>(channels) * frames * bins;
    }
    std::size_t size() const { return index.size(); }
    Tensor3 window(std::size_t i) const;
    std::vector<int> labels() const;
    std::vector<bool> synthetic_flags() const;
};

void save_dataset(const std::filesystem::path& dir, const Dataset& ds);
Dataset load_dataset(const std::filesystem::path& dir, int channels, int frames);

struct BuildStats {
    int n_preictal = 0, n_interictal = 0, n_synthetic = 0;
    double step_s = 0.0;
    bool no_seizures = false;
};

/// Full ingestion pipeline: parse the recordings and their seizure
/// summary, select leading seizures on the concatenated timeline, label
/// and balance windows, and write the dataset directory.
BuildStats build_dataset(const std::vector<std::filesystem::path>& edf_files,
                         const std::string& summary_text, const ClinicalWindows& cw,
                         const std::filesystem::path& out_dir);

}  // namespace memseize
