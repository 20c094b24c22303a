#pragma once

#include <Eigen/Dense>
#include <vector>

namespace memseize {

/// Dense row-major (channel, height, width) tensor of doubles.
struct Tensor3 {
    int c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int c_, int h_, int w_)
        : c(c_), h(h_), w(w_), data(static_cast<std::size_t>(c_) * h_ * w_, 0.0) {}

    double& at(int ci, int hi, int wi) {
        return data[(static_cast<std::size_t>(ci) * h + hi) * w + wi];
    }
    double at(int ci, int hi, int wi) const {
        return data[(static_cast<std::size_t>(ci) * h + hi) * w + wi];
    }
    std::size_t size() const { return data.size(); }
};

/// Activation map: channels x (h*w) matrix with positions in h-major order.
struct FeatureMap {
    Eigen::MatrixXd m;  // rows = channels, cols = h * w
    int h = 0, w = 0;

    int channels() const { return static_cast<int>(m.rows()); }
};

/// Copies a tensor into the matrix layout used by the layer kernels.
FeatureMap to_feature_map(const Tensor3& t);

/// Row-major (channel-major) flattening, the order the first fully
/// connected layer consumes.
Eigen::VectorXd flatten(const FeatureMap& f);

}  // namespace memseize
