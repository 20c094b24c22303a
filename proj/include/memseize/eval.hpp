#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "memseize/dataset.hpp"
#include "memseize/network.hpp"
#include "memseize/preprocess.hpp"
#include "memseize/training.hpp"

namespace memseize {

/// Mann-Whitney pair statistic: P(score_pos > score_neg) with half
/// credit for ties. Throws when either class is absent.
double auroc(const std::vector<double>& scores, const std::vector<int>& labels);

struct MetricsReport {
    double accuracy = 0.0;
    double sensitivity = 0.0;
    double auroc = 0.0;  // NaN when only one class is present
    double fpr_per_hour = 0.0;
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double interictal_hours = 0.0;
    std::optional<double> event_sensitivity;
};

/// Window-level metrics at a fixed threshold on the preictal probability.
/// Throws when false positives exist but interictal_hours <= 0.
MetricsReport metrics(const std::vector<double>& preictal_prob, const std::vector<int>& labels,
                      double interictal_hours, double threshold = 0.5);

/// Fraction of seizures with some alarm tau satisfying
/// onset in [tau + SPH, tau + SPH + SOP].
double event_sensitivity(const std::vector<double>& alarm_times_s,
                         const std::vector<double>& onsets_s, const ClinicalWindows& cw);

struct SweepOptions {
    std::vector<double> sigmas{0.0};
    std::vector<int> states{kContinuousStates};
    int seeds = 1;
    WeightScheme scheme = WeightScheme::DoubleColumn;
    TileConfig tile;
    double window_seconds = 30.0;
    int jobs = 0;  // 0 = hardware concurrency
};

struct SweepRow {
    double sigma = 0.0;
    int n_states = kContinuousStates;
    int seed = 0;
    int fold = 0;
    MetricsReport m;
};

/// Nonideality grid: for every (sigma, states, seed) cell each fold's
/// weights are remapped with fresh devices and evaluated on that fold's
/// validation windows. Rows come back in (sigma, states, seed, fold)
/// lexicographic order regardless of worker scheduling; a failing cell is
/// reported on stderr and skipped without aborting the grid.
std::vector<SweepRow> sweep(const NetworkSpec& spec,
                            const std::vector<LayerWeights>& fold_weights, const Dataset& ds,
                            const FoldPlan& plan, const DeviceParameters& base_device,
                            const SweepOptions& opt, std::uint64_t base_seed);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Ideal-backend counterpart used as the sigma=0 baseline.
std::vector<SweepRow> evaluate_ideal(const NetworkSpec& spec,
                                     const std::vector<LayerWeights>& fold_weights,
                                     const Dataset& ds, const FoldPlan& plan,
                                     double window_seconds);

}  // namespace memseize
