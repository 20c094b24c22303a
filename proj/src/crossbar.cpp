#include "memseize/crossbar.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "memseize/util.hpp"

namespace memseize {

std::pair<int, int> partition(int rows, int cols, const TileConfig& tile) {
    if (rows < 1 || cols < 1) throw std::invalid_argument("partition: empty matrix");
    if (tile.rows < 1 || tile.cols < 1) throw std::invalid_argument("partition: bad tile");
    return {(rows + tile.rows - 1) / tile.rows, (cols + tile.cols - 1) / tile.cols};
}

namespace {

double program_cell(double target, const DeviceParameters& params, Rng cell_rng) {
    const DeviceInstance dev = sample_device(params, cell_rng);
    return quantize(target, dev);
}

}  // namespace

MappedLayer map_weights(const Eigen::MatrixXd& w, WeightScheme scheme,
                        const DeviceParameters& params, const TileConfig& tile,
                        std::uint64_t seed) {
    params.validate();
    if (w.rows() < 1 || w.cols() < 1) throw std::invalid_argument("map_weights: empty matrix");
    if (!w.allFinite()) throw std::invalid_argument("map_weights: non-finite weight");

    const double g_on = 1.0 / params.r_on_mean;
    const double g_off = 1.0 / params.r_off_mean;
    const double dg = g_on - g_off;
    const double w_max = w.cwiseAbs().maxCoeff();

    MappedLayer layer;
    layer.logical_rows = static_cast<int>(w.rows());
    layer.logical_cols = static_cast<int>(w.cols());
    layer.scheme = scheme;
    layer.tile = tile;

    const Eigen::Index rows = w.rows(), cols = w.cols();
    layer.target_pos.resize(rows, cols);
    if (scheme == WeightScheme::DoubleColumn) {
        layer.target_neg.resize(rows, cols);
        layer.k_scale = w_max > 0.0 ? w_max / dg : 1.0;
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double v = w(i, j);
                const double mag = w_max > 0.0 ? std::abs(v) / w_max * dg : 0.0;
                layer.target_pos(i, j) = v >= 0.0 ? g_off + mag : g_off;
                layer.target_neg(i, j) = v < 0.0 ? g_off + mag : g_off;
            }
    } else {
        layer.k_scale = w_max > 0.0 ? 2.0 * w_max / dg : 1.0;
        layer.g_m = mirror_offset(params.r_on_mean, params.r_off_mean);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) {
                const double frac = w_max > 0.0 ? (w(i, j) + w_max) / (2.0 * w_max) : 0.5;
                layer.target_pos(i, j) = g_off + frac * dg;
            }
    }

    const Rng base(seed);
    layer.g_pos.resize(rows, cols);
    if (scheme == WeightScheme::DoubleColumn) layer.g_neg.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            const std::uint64_t q = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(cols) +
                                    static_cast<std::uint64_t>(j);
            layer.g_pos(i, j) = program_cell(layer.target_pos(i, j), params, base.derive(2 * q));
            if (scheme == WeightScheme::DoubleColumn)
                layer.g_neg(i, j) =
                    program_cell(layer.target_neg(i, j), params, base.derive(2 * q + 1));
        }
    return layer;
}

Eigen::MatrixXd vmm(const MappedLayer& layer, const Eigen::MatrixXd& x) {
    if (x.rows() != layer.logical_rows)
        throw std::invalid_argument("vmm: input length " + std::to_string(x.rows()) +
                                    " does not match fan-in " +
                                    std::to_string(layer.logical_rows));
    const Eigen::Index batch = x.cols();
    const Eigen::Index rows = layer.logical_rows, cols = layer.logical_cols;

    // Per-column voltage encoding: v = (x / x_max) * read_voltage.
    Eigen::VectorXd x_max(batch);
    Eigen::MatrixXd volts(rows, batch);
    for (Eigen::Index b = 0; b < batch; ++b) {
        const double m = x.col(b).cwiseAbs().maxCoeff();
        x_max(b) = m;
        volts.col(b) = m > 0.0 ? (x.col(b) * (layer.read_voltage / m)).eval()
                               : Eigen::VectorXd::Zero(rows).eval();
    }

    const auto [tiles_r, tiles_c] = partition(static_cast<int>(rows), static_cast<int>(cols), layer.tile);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(cols, batch);
    for (int tr = 0; tr < tiles_r; ++tr) {
        const Eigen::Index r0 = static_cast<Eigen::Index>(tr) * layer.tile.rows;
        const Eigen::Index nr = std::min<Eigen::Index>(layer.tile.rows, rows - r0);
        for (int tc = 0; tc < tiles_c; ++tc) {
            const Eigen::Index c0 = static_cast<Eigen::Index>(tc) * layer.tile.cols;
            const Eigen::Index nc = std::min<Eigen::Index>(layer.tile.cols, cols - c0);
            const auto v_blk = volts.middleRows(r0, nr);
            if (layer.scheme == WeightScheme::DoubleColumn) {
                const Eigen::MatrixXd i_pos =
                    layer.g_pos.block(r0, c0, nr, nc).transpose() * v_blk;
                const Eigen::MatrixXd i_neg =
                    layer.g_neg.block(r0, c0, nr, nc).transpose() * v_blk;
                out.middleRows(c0, nc) += i_pos - i_neg;
            } else {
                Eigen::MatrixXd cur = layer.g_pos.block(r0, c0, nr, nc).transpose() * v_blk;
                const Eigen::RowVectorXd mirror = layer.g_m * v_blk.colwise().sum();
                cur.rowwise() += mirror;
                out.middleRows(c0, nc) += cur;
            }
        }
    }
    for (Eigen::Index b = 0; b < batch; ++b)
        out.col(b) *= layer.k_scale * (x_max(b) / layer.read_voltage);
    return out;
}

Eigen::VectorXd vmm(const MappedLayer& layer, const Eigen::VectorXd& x) {
    return vmm(layer, Eigen::MatrixXd(x)).col(0);
}

void dump_cells(const MappedLayer& layer, std::ostream& out) {
    out << "row,col,grid,g_target,g_programmed\n";
    const bool dual = layer.scheme == WeightScheme::DoubleColumn;
    for (Eigen::Index i = 0; i < layer.g_pos.rows(); ++i)
        for (Eigen::Index j = 0; j < layer.g_pos.cols(); ++j) {
            out << i << ',' << j << ",pos," << format_double(layer.target_pos(i, j)) << ','
                << format_double(layer.g_pos(i, j)) << '\n';
            if (dual)
                out << i << ',' << j << ",neg," << format_double(layer.target_neg(i, j)) << ','
                    << format_double(layer.g_neg(i, j)) << '\n';
        }
}

}  // namespace memseize
