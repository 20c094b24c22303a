#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "memseize/crossbar.hpp"
#include "memseize/layers.hpp"
#include "memseize/rng.hpp"
#include "memseize/tensor.hpp"

namespace memseize {

/// The fixed CNN topology: three strided/pooled conv stages feeding two
/// fully connected layers, parameterized by electrode count and frame
/// count. Construction validates that no spatial dimension collapses.
struct NetworkSpec {
    struct Conv {
        int filters, kh, kw, sh, sw;
    };

    int channels = 0;   // input electrodes
    int frames = 0;     // input height (time frames)
    int bins = 114;     // input width (frequency bins)
    std::array<Conv, 3> conv{{{16, 5, 5, 2, 2}, {32, 3, 3, 1, 1}, {64, 3, 3, 1, 1}}};
    int fc1_out = 256;
    int classes = 2;

    static NetworkSpec make(int n, int p);

    int fc1_in() const { return fc1_in_; }

private:
    int fc1_in_ = 0;
};

struct StageShape {
    std::string name;
    int c, h, w;
};

struct ShapeTable {
    std::vector<StageShape> stages;  // conv1, pool1, conv2, pool2, conv3, pool3
    int fc1_in = 0, fc1_out = 0, fc2_out = 0;
};

/// Per-stage output shapes for an n-channel, p-frame input.
ShapeTable shapes(int n, int p);

struct BatchNormParams {
    Eigen::VectorXd gain, bias, mean, var;
};

/// Trainable tensors plus the per-channel input standardization fitted on
/// the training split. Conv filters are stored as (filters x fan_in)
/// matrices matching the im2col layout; no layer carries a bias term
/// (batch norm provides the affine offsets).
struct LayerWeights {
    std::array<Eigen::MatrixXd, 3> conv;
    std::array<BatchNormParams, 3> conv_bn;
    Eigen::MatrixXd fc1, fc2;  // out x in
    BatchNormParams fc_bn;
    Eigen::VectorXd norm_mean, norm_std;  // per input channel

    static LayerWeights zeros(const NetworkSpec& spec);
    /// Kaiming-uniform filters, identity batch norm.
    static LayerWeights init(const NetworkSpec& spec, Rng& rng);
};

/// All five weight matrices realized as crossbars. When batch norm is
/// folded, each conv/fc1 filter row is pre-scaled by gain/sqrt(var+eps)
/// and the remaining affine offset is applied digitally after the VMM.
struct MappedNetwork {
    std::vector<MappedLayer> layers;  // conv1..3, fc1, fc2
    bool folded = false;
    std::vector<Eigen::VectorXd> fold_bias;  // conv1..3, fc1 (empty when not folded)
};

MappedNetwork map_network(const NetworkSpec& spec, const LayerWeights& w,
                          const DeviceParameters& params, const TileConfig& tile,
                          WeightScheme scheme, std::uint64_t seed,
                          bool fold_batchnorm = false);

/// Inference pass. `mapped == nullptr` selects the ideal floating-point
/// backend; otherwise every conv (via im2col) and fully connected product
/// is routed through the crossbar VMM while pooling, batch norm, ReLU and
/// softmax stay digital. Input must already be standardized.
Eigen::VectorXd forward_logits(const NetworkSpec& spec, const LayerWeights& w, const Tensor3& x,
                               const MappedNetwork* mapped = nullptr);
Eigen::VectorXd forward_probs(const NetworkSpec& spec, const LayerWeights& w, const Tensor3& x,
                              const MappedNetwork* mapped = nullptr);

Tensor3 standardize(const Tensor3& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& std);

// --- weight container -----------------------------------------------------
// A directory holding `manifest` (one line per tensor: name, shape, byte
// offset) and `weights.bin` (row-major little-endian float32). Round-trips
// bit-exactly.

void save_weights(const std::filesystem::path& dir, const NetworkSpec& spec,
                  const LayerWeights& w);
LayerWeights load_weights(const std::filesystem::path& dir, const NetworkSpec& spec);

}  // namespace memseize
