#pragma once

#include <Eigen/Dense>
#include <vector>

#include "memseize/tensor.hpp"

namespace memseize {

inline constexpr double kBatchNormEps = 1e-5;

/// Unrolls sliding windows into columns: the result has one column per
/// output position (row-major over the output grid) and c*kh*kw rows
/// (channel-major, then kernel row, then kernel column), so a convolution
/// becomes filter-matrix times im2col-matrix.
Eigen::MatrixXd im2col(const FeatureMap& x, int kh, int kw, int sh, int sw);

/// Adjoint of im2col: scatter-adds column gradients back onto the input grid.
FeatureMap col2im(const Eigen::MatrixXd& dcols, int c, int h, int w, int kh, int kw, int sh,
                  int sw);

std::pair<int, int> conv_output_shape(int h, int w, int kh, int kw, int sh, int sw);

struct PoolResult {
    FeatureMap out;
    std::vector<Eigen::Index> argmax;  // flat input position per output cell
};

/// 2x2 max pooling with stride 2; odd trailing rows/columns are dropped.
PoolResult maxpool2(const FeatureMap& x);
FeatureMap maxpool2_backward(const FeatureMap& dy, const std::vector<Eigen::Index>& argmax,
                             int c, int in_h, int in_w);

// --- batch normalization -------------------------------------------------
// Statistics are taken per channel over every sample and spatial position
// of the batch (biased variance). Inference applies the stored affine
// y = gain * (x - mean) / sqrt(var + eps) + bias.

struct BnCache {
    Eigen::VectorXd mean, var, inv_std;
    std::vector<Eigen::MatrixXd> x_hat;  // per sample
    Eigen::Index count = 0;
};

void bn_forward_train(std::vector<Eigen::MatrixXd>& acts, const Eigen::VectorXd& gain,
                      const Eigen::VectorXd& bias, BnCache& cache);
void bn_backward(const std::vector<Eigen::MatrixXd>& dout, const BnCache& cache,
                 const Eigen::VectorXd& gain, std::vector<Eigen::MatrixXd>& dx,
                 Eigen::VectorXd& dgain, Eigen::VectorXd& dbias);
void bn_inference(Eigen::MatrixXd& act, const Eigen::VectorXd& gain, const Eigen::VectorXd& bias,
                  const Eigen::VectorXd& mean, const Eigen::VectorXd& var);

inline void relu(Eigen::MatrixXd& m) { m = m.cwiseMax(0.0); }

/// dx = dy where the forward input was positive, 0 elsewhere.
Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x);

/// Numerically stable log-softmax over a logit vector.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace memseize
