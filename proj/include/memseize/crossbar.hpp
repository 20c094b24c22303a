#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <utility>

#include "memseize/device.hpp"

namespace memseize {

/// DoubleColumn keeps positive and negative weight parts on separate
/// conductance grids; SingleColumn uses one grid plus a fixed current
/// mirror offset per cell.
enum class WeightScheme { DoubleColumn, SingleColumn };

struct TileConfig {
    int rows = 128;
    int cols = 128;
};

/// (tile rows, tile cols) needed to cover a rows x cols weight matrix.
std::pair<int, int> partition(int rows, int cols, const TileConfig& tile);

/// A weight matrix realized as crossbar conductances.
///
/// `g_pos`/`g_neg` hold the programmed (sampled + quantized) conductances;
/// `target_pos`/`target_neg` the pre-nonideality targets, kept for
/// debugging dumps. SingleColumn uses only the `pos` grids plus `g_m`.
/// Logical rows are the layer fan-in, columns the fan-out.
struct MappedLayer {
    int logical_rows = 0;
    int logical_cols = 0;
    WeightScheme scheme = WeightScheme::DoubleColumn;
    TileConfig tile;
    double k_scale = 1.0;      // layer scale converting currents to outputs
    double g_m = 0.0;          // mirror offset (SingleColumn only)
    double read_voltage = 0.3;  // volts, maximum input encoding voltage

    Eigen::MatrixXd g_pos, g_neg;
    Eigen::MatrixXd target_pos, target_neg;
};

/// Maps W (rows = fan-in, cols = fan-out) onto crossbar conductances.
///
/// DoubleColumn: w >= 0 goes to the positive grid as
///   g = g_off + (w / w_max) * (g_on - g_off)
/// with the negative cell parked at g_off (and symmetrically for w < 0);
/// k_scale = w_max / (g_on - g_off). SingleColumn shifts the whole range,
///   g = g_off + ((w + w_max) / (2 w_max)) * (g_on - g_off),
/// k_scale = 2 w_max / (g_on - g_off), and records the mirror offset.
/// g_on/g_off are the nominal (mean) conductance bounds. Each target then
/// passes through per-cell device sampling and quantization against that
/// cell's own state list. An all-zero matrix parks every cell and sets
/// k_scale = 1.
///
/// Cell sub-seeds: cell (i, j) with flat index q = i * cols + j draws its
/// positive-grid device from substream 2q and its negative-grid device
/// from 2q + 1, so grids never share devices and parallel programming is
/// reproducible.
MappedLayer map_weights(const Eigen::MatrixXd& w, WeightScheme scheme,
                        const DeviceParameters& params, const TileConfig& tile,
                        std::uint64_t seed);

/// In-memory vector-matrix multiply: inputs are encoded as voltages
/// v = (x / x_max) * read_voltage, per-tile column currents I = sum g * v
/// are accumulated over the tile-row partitions in fixed tile order, and
/// outputs are k_scale * (x_max / read_voltage) * (I_pos - I_neg). The
/// single-column path offsets every cell current by g_m instead of
/// subtracting a negative grid. Returns a vector of length logical_cols.
Eigen::VectorXd vmm(const MappedLayer& layer, const Eigen::VectorXd& x);

/// Batched form: every column of `x` is an independent input vector with
/// its own voltage normalization.
Eigen::MatrixXd vmm(const MappedLayer& layer, const Eigen::MatrixXd& x);

/// Debug CSV dump: row, col, grid, target and programmed conductance.
void dump_cells(const MappedLayer& layer, std::ostream& out);

}  // namespace memseize
