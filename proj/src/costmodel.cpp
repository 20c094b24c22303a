#include "memseize/costmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "memseize/util.hpp"

namespace memseize {

void HardwareParams::validate() const {
    if (adc_area_mm2 <= 0 || adc_power_w <= 0 || adc_rate_hz <= 0 || cell_area_mm2 <= 0 ||
        read_voltage <= 0 || r_avg_ohm <= 0 || tile.rows < 1 || tile.cols < 1)
        throw std::invalid_argument("hardware parameters must be positive");
}

std::vector<LayerCost> duplication_plan(const NetworkSpec& spec, const TileConfig& tile) {
    const ShapeTable table = shapes(spec.channels, spec.frames);
    std::vector<LayerCost> plan;
    int in_c = spec.channels;
    for (int l = 0; l < 3; ++l) {
        const auto& cv = spec.conv[static_cast<std::size_t>(l)];
        LayerCost lc;
        lc.name = "conv" + std::to_string(l + 1);
        lc.fan_in = in_c * cv.kh * cv.kw;
        lc.fan_out = cv.filters;
        const auto [tr, tc] = partition(lc.fan_in, lc.fan_out, tile);
        lc.tiles = tr * tc;
        const auto& out_shape = table.stages[static_cast<std::size_t>(2 * l)];
        lc.duplicates = out_shape.h;  // one tile-set copy per output row
        lc.steps = out_shape.w;       // one VMM per output column
        plan.push_back(lc);
        in_c = cv.filters;
    }
    for (const auto& [name, rows, cols] :
         {std::tuple<const char*, int, int>{"fc1", table.fc1_in, table.fc1_out},
          std::tuple<const char*, int, int>{"fc2", table.fc1_out, table.fc2_out}}) {
        LayerCost lc;
        lc.name = name;
        lc.fan_in = rows;
        lc.fan_out = cols;
        const auto [tr, tc] = partition(rows, cols, tile);
        lc.tiles = tr * tc;
        lc.duplicates = 1;
        lc.steps = 1;
        plan.push_back(lc);
    }
    return plan;
}

int tile_count(const NetworkSpec& spec, const TileConfig& tile) {
    int total = 0;
    for (const auto& lc : duplication_plan(spec, tile)) total += lc.tiles;
    return total;
}

CostReport estimate(const NetworkSpec& spec, const HardwareParams& hw, ReadoutMode mode,
                    bool strict_double_column) {
    hw.validate();
    CostReport report;
    report.mode = mode;
    report.layers = duplication_plan(spec, hw.tile);
    for (auto& lc : report.layers) {
        if (strict_double_column) lc.tiles *= 2;
        report.tile_count += lc.tiles;
        report.bottleneck_steps = std::max(report.bottleneck_steps, lc.steps);
    }

    const double cells_per_tile = static_cast<double>(hw.tile.rows) * hw.tile.cols;
    const int adcs_per_tile = mode == ReadoutMode::TDM ? 1 : hw.tile.cols;
    const double t_vmm = (mode == ReadoutMode::TDM ? hw.tile.cols : 1) / hw.adc_rate_hz;
    const double active_cells =
        mode == ReadoutMode::TDM ? static_cast<double>(hw.tile.rows) : cells_per_tile;

    report.area_mm2 =
        report.tile_count * (cells_per_tile * hw.cell_area_mm2 + adcs_per_tile * hw.adc_area_mm2);
    report.latency_ms = report.bottleneck_steps * t_vmm * 1e3;
    report.power_w = report.tile_count * adcs_per_tile * hw.adc_power_w +
                     active_cells * hw.read_voltage * hw.read_voltage / hw.r_avg_ohm;
    report.energy_mj = report.power_w * report.latency_ms;
    return report;
}

namespace {

const char* mode_name(ReadoutMode m) {
    return m == ReadoutMode::TDM ? "TDM" : "Parallelized";
}

}  // namespace

void write_cost_csv(std::ostream& out, const std::vector<CostReport>& reports) {
    out << "mode,power_w,area_mm2,latency_ms,energy_mj,tiles,bottleneck_steps\n";
    for (const auto& r : reports)
        out << mode_name(r.mode) << ',' << format_double(r.power_w) << ','
            << format_double(r.area_mm2) << ',' << format_double(r.latency_ms) << ','
            << format_double(r.energy_mj) << ',' << r.tile_count << ',' << r.bottleneck_steps
            << '\n';
    out << "# tile counts and area exclude the latency-balancing duplicates listed per layer\n";
}

void render_cost_table(std::ostream& out, const std::vector<CostReport>& reports) {
    char line[160];
    std::snprintf(line, sizeof line, "%-14s %-12s %-12s %-14s %-12s\n", "Imp.", "Power (W)",
                  "Area (mm2)", "Latency (ms)", "Energy (mJ)");
    out << line;
    for (const auto& r : reports) {
        std::snprintf(line, sizeof line, "%-14s %-12.4g %-12.4g %-14.4g %-12.4g\n",
                      mode_name(r.mode), r.power_w, r.area_mm2, r.latency_ms, r.energy_mj);
        out << line;
    }
    if (!reports.empty()) {
        out << "\nper-layer plan (" << reports.front().layers.size() << " layers):\n";
        for (const auto& lc : reports.front().layers) {
            std::snprintf(line, sizeof line, "  %-6s %4d x %-4d tiles=%-3d dup=%-3d steps=%d\n",
                          lc.name.c_str(), lc.fan_in, lc.fan_out, lc.tiles, lc.duplicates,
                          lc.steps);
            out << line;
        }
        out << "note: reported area counts each tile set once; balancing the per-layer\n"
               "latency requires the duplicate tile sets listed above, which the area\n"
               "and power figures deliberately exclude.\n";
    }
}

}  // namespace memseize
