#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "memseize/crossbar.hpp"
#include "memseize/network.hpp"

namespace memseize {

/// 65nm implementation constants: an 8-bit ADC, the RRAM cell footprint,
/// and the constant-read operating point.
struct HardwareParams {
    double adc_area_mm2 = 3e-3;
    double adc_power_w = 2e-4;
    double adc_rate_hz = 5e6;
    double cell_area_mm2 = 1.69e-7;
    double read_voltage = 0.3;
    double r_avg_ohm = 1300.0;  // (mean R_ON + mean R_OFF) / 2
    TileConfig tile;

    void validate() const;
};

/// TDM: one ADC per tile, time-multiplexed over its columns.
/// Parallelized: one ADC per column, all columns converted at once.
enum class ReadoutMode { TDM, Parallelized };

struct LayerCost {
    std::string name;
    int fan_in = 0, fan_out = 0;
    int tiles = 0;        // ceil(fan_in/tile_rows) * ceil(fan_out/tile_cols)
    int duplicates = 0;   // tile-set copies needed to balance layer latency
    int steps = 0;        // sequential VMMs per inference
};

struct CostReport {
    ReadoutMode mode = ReadoutMode::TDM;
    double power_w = 0.0;
    double area_mm2 = 0.0;
    double latency_ms = 0.0;
    double energy_mj = 0.0;
    int tile_count = 0;
    int bottleneck_steps = 0;
    std::vector<LayerCost> layers;
};

/// Crossbar tiles required for all conv/fc layers; conv fan-in counts
/// in_channels * kh * kw, fan-out the filter count. One column per logical
/// weight (the double-column scheme is not double-counted); pass
/// strict_double_column to duplication-free estimate() for the doubled
/// variant.
int tile_count(const NetworkSpec& spec, const TileConfig& tile);

/// Per-layer tiles, duplicate counts (one copy per conv output row, so a
/// whole row of output positions is computed per step) and the sequential
/// step counts (conv output width; 1 for fc layers).
std::vector<LayerCost> duplication_plan(const NetworkSpec& spec, const TileConfig& tile);

/// Analytical power/area/latency/energy for one readout mode.
///   area    = tiles * (cells * cell_area + adcs_per_tile * adc_area)
///   latency = bottleneck_steps * (columns_per_adc / adc_rate)
///   power   = total_adcs * adc_power + active_cells * V^2 / r_avg
/// with one column of cells active under TDM conversion and a whole tile
/// under parallel conversion. Tile counts exclude latency-balancing
/// duplicates; `strict_double_column` doubles them for two-crossbar
/// weight storage.
CostReport estimate(const NetworkSpec& spec, const HardwareParams& hw, ReadoutMode mode,
                    bool strict_double_column = false);

void write_cost_csv(std::ostream& out, const std::vector<CostReport>& reports);
void render_cost_table(std::ostream& out, const std::vector<CostReport>& reports);

}  // namespace memseize
