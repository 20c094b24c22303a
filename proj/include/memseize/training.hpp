#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "memseize/dataset.hpp"
#include "memseize/network.hpp"

namespace memseize {

struct TrainingParams {
    int epochs = 50;
    int batch = 256;
    double lr = 1e-4;
    int folds = 5;
};

/// Mean negative log-likelihood: log_probs holds log-softmax outputs,
/// one row per sample. Targets outside [0, classes) are rejected.
double nll_loss(const Eigen::MatrixXd& log_probs, const std::vector<int>& targets);

/// Adam-style moments with a gradient-change friction term:
///   xi = 1 / (1 + exp(-|g_prev - g|))   elementwise,
///   theta -= lr * xi * m_hat / (sqrt(v_hat) + eps).
/// `unit_friction` forces xi = 1, which reduces the update to plain Adam
/// through the same code path.
struct DiffGrad {
    double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    long step = 0;
    std::vector<Eigen::ArrayXd> m, v, g_prev;

    void init(const std::vector<Eigen::Index>& sizes);
    void update(std::vector<double*>& params, const std::vector<Eigen::ArrayXd>& grads,
                bool unit_friction = false);
};

/// Per-fold train/validation split. Validation folds partition the real
/// windows with per-class proportions within one sample of the global
/// ratio; synthetic windows are training-only.
struct FoldPlan {
    int k = 0;
    std::vector<std::vector<int>> val;
    std::vector<std::vector<int>> train;
};

FoldPlan stratified_kfold(const std::vector<int>& labels, const std::vector<bool>& synthetic,
                          int k, std::uint64_t seed);

// --- batched forward/backward (training path) ------------------------------

struct TrainBatchCache {
    std::array<std::vector<Eigen::MatrixXd>, 3> cols;       // im2col per sample
    std::array<std::vector<Eigen::MatrixXd>, 3> pre_relu;   // post-bn conv activations
    std::array<std::vector<std::vector<Eigen::Index>>, 3> pool_arg;
    std::array<std::pair<int, int>, 3> conv_hw, pool_hw;
    std::array<BnCache, 3> bn;
    Eigen::MatrixXd fc_in;        // flattened pool3, fc1_in x batch
    Eigen::MatrixXd fc_pre_relu;  // post-bn fc1 activations
    Eigen::MatrixXd fc_hidden;    // post-relu fc1 activations
    BnCache fc_bn;
};

/// Gradients in the same shapes as the trainable tensors.
struct Gradients {
    std::array<Eigen::MatrixXd, 3> conv;
    std::array<Eigen::VectorXd, 3> conv_gain, conv_bias;
    Eigen::MatrixXd fc1, fc2;
    Eigen::VectorXd fc_gain, fc_bias;
};

Eigen::MatrixXd forward_train(const NetworkSpec& spec, const LayerWeights& w,
                              const std::vector<Tensor3>& batch, TrainBatchCache& cache);
Gradients backward_train(const NetworkSpec& spec, const LayerWeights& w,
                         const Eigen::MatrixXd& log_probs, const std::vector<int>& targets,
                         const TrainBatchCache& cache);

struct EpochLog {
    int epoch = 0, fold = 0;
    double loss = 0.0, train_accuracy = 0.0;
};

struct TrainResult {
    LayerWeights weights;
    std::vector<EpochLog> log;
};

/// Trains one fold from Kaiming-uniform init with DiffGrad and a
/// per-epoch deterministic shuffle; batch norm keeps running statistics
/// (momentum 0.1) which become the stored inference affine. Inputs are
/// standardized per channel against statistics of the training split.
/// Throws on a non-finite loss.
TrainResult train_fold(const NetworkSpec& spec, const Dataset& ds, const FoldPlan& plan,
                       int fold, const TrainingParams& params, std::uint64_t seed);

}  // namespace memseize
