#include "memseize/network.hpp"

#include <cmath>
#include <stdexcept>

namespace memseize {

NetworkSpec NetworkSpec::make(int n, int p) {
    if (n < 1) throw std::invalid_argument("network: channel count must be >= 1");
    NetworkSpec spec;
    spec.channels = n;
    spec.frames = p;
    const ShapeTable table = shapes(n, p);  // validates
    spec.fc1_in_ = table.fc1_in;
    return spec;
}

ShapeTable shapes(int n, int p) {
    ShapeTable t;
    const NetworkSpec proto;  // topology constants only
    int c = n, h = p, w = proto.bins;
    const char* conv_names[] = {"conv1", "conv2", "conv3"};
    const char* pool_names[] = {"pool1", "pool2", "pool3"};
    for (int l = 0; l < 3; ++l) {
        const auto& cv = proto.conv[static_cast<std::size_t>(l)];
        if (h < cv.kh || w < cv.kw)
            throw std::invalid_argument(std::string("network: ") + conv_names[l] +
                                        " input smaller than kernel");
        h = (h - cv.kh) / cv.sh + 1;
        w = (w - cv.kw) / cv.sw + 1;
        c = cv.filters;
        t.stages.push_back({conv_names[l], c, h, w});
        h /= 2;
        w /= 2;
        if (h < 1 || w < 1)
            throw std::invalid_argument(std::string("network: ") + pool_names[l] +
                                        " output collapsed");
        t.stages.push_back({pool_names[l], c, h, w});
    }
    t.fc1_in = c * h * w;
    t.fc1_out = proto.fc1_out;
    t.fc2_out = proto.classes;
    return t;
}

LayerWeights LayerWeights::zeros(const NetworkSpec& spec) {
    LayerWeights w;
    int in_c = spec.channels;
    for (int l = 0; l < 3; ++l) {
        const auto& cv = spec.conv[static_cast<std::size_t>(l)];
        const int fan_in = in_c * cv.kh * cv.kw;
        w.conv[static_cast<std::size_t>(l)] = Eigen::MatrixXd::Zero(cv.filters, fan_in);
        auto& bn = w.conv_bn[static_cast<std::size_t>(l)];
        bn.gain = Eigen::VectorXd::Ones(cv.filters);
        bn.bias = Eigen::VectorXd::Zero(cv.filters);
        bn.mean = Eigen::VectorXd::Zero(cv.filters);
        bn.var = Eigen::VectorXd::Ones(cv.filters);
        in_c = cv.filters;
    }
    w.fc1 = Eigen::MatrixXd::Zero(spec.fc1_out, spec.fc1_in());
    w.fc_bn.gain = Eigen::VectorXd::Ones(spec.fc1_out);
    w.fc_bn.bias = Eigen::VectorXd::Zero(spec.fc1_out);
    w.fc_bn.mean = Eigen::VectorXd::Zero(spec.fc1_out);
    w.fc_bn.var = Eigen::VectorXd::Ones(spec.fc1_out);
    w.fc2 = Eigen::MatrixXd::Zero(spec.classes, spec.fc1_out);
    w.norm_mean = Eigen::VectorXd::Zero(spec.channels);
    w.norm_std = Eigen::VectorXd::Ones(spec.channels);
    return w;
}

namespace {

void kaiming_fill(Eigen::MatrixXd& m, Rng& rng) {
    const double bound = std::sqrt(6.0 / static_cast<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = (2.0 * rng.next_double() - 1.0) * bound;
}

}  // namespace

LayerWeights LayerWeights::init(const NetworkSpec& spec, Rng& rng) {
    LayerWeights w = zeros(spec);
    for (auto& f : w.conv) kaiming_fill(f, rng);
    kaiming_fill(w.fc1, rng);
    kaiming_fill(w.fc2, rng);
    return w;
}

MappedNetwork map_network(const NetworkSpec& spec, const LayerWeights& w,
                          const DeviceParameters& params, const TileConfig& tile,
                          WeightScheme scheme, std::uint64_t seed, bool fold_batchnorm) {
    MappedNetwork net;
    net.folded = fold_batchnorm;
    const Rng base(seed);
    std::vector<Eigen::MatrixXd> mats;  // fan_in x fan_out, ready for mapping
    for (int l = 0; l < 3; ++l) {
        Eigen::MatrixXd f = w.conv[static_cast<std::size_t>(l)];
        const auto& bn = w.conv_bn[static_cast<std::size_t>(l)];
        if (fold_batchnorm) {
            const Eigen::ArrayXd scale =
                bn.gain.array() * (bn.var.array() + kBatchNormEps).rsqrt();
            f = (f.array().colwise() * scale).matrix();
            net.fold_bias.push_back(bn.bias - (scale * bn.mean.array()).matrix());
        }
        mats.push_back(f.transpose());
    }
    {
        Eigen::MatrixXd f = w.fc1;
        if (fold_batchnorm) {
            const Eigen::ArrayXd scale =
                w.fc_bn.gain.array() * (w.fc_bn.var.array() + kBatchNormEps).rsqrt();
            f = (f.array().colwise() * scale).matrix();
            net.fold_bias.push_back(w.fc_bn.bias - (scale * w.fc_bn.mean.array()).matrix());
        }
        mats.push_back(f.transpose());
    }
    mats.push_back(w.fc2.transpose());
    for (std::size_t l = 0; l < mats.size(); ++l)
        net.layers.push_back(
            map_weights(mats[l], scheme, params, tile, base.derive(l).next_u64()));
    (void)spec;
    return net;
}

namespace {

Eigen::MatrixXd layer_product(const Eigen::MatrixXd& filters, const Eigen::MatrixXd& cols,
                              const MappedNetwork* mapped, std::size_t layer_idx) {
    if (mapped == nullptr) return filters * cols;
    return vmm(mapped->layers[layer_idx], cols);
}

}  // namespace

Eigen::VectorXd forward_logits(const NetworkSpec& spec, const LayerWeights& w, const Tensor3& x,
                               const MappedNetwork* mapped) {
    if (x.c != spec.channels || x.h != spec.frames || x.w != spec.bins)
        throw std::invalid_argument("forward: input shape mismatch");
    const bool folded = mapped != nullptr && mapped->folded;

    FeatureMap act = to_feature_map(x);
    for (std::size_t l = 0; l < 3; ++l) {
        const auto& cv = spec.conv[l];
        const auto [oh, ow] = conv_output_shape(act.h, act.w, cv.kh, cv.kw, cv.sh, cv.sw);
        const Eigen::MatrixXd cols = im2col(act, cv.kh, cv.kw, cv.sh, cv.sw);
        FeatureMap out;
        out.h = oh;
        out.w = ow;
        out.m = layer_product(w.conv[l], cols, mapped, l);
        if (folded)
            out.m.colwise() += mapped->fold_bias[l];
        else {
            const auto& bn = w.conv_bn[l];
            bn_inference(out.m, bn.gain, bn.bias, bn.mean, bn.var);
        }
        relu(out.m);
        act = maxpool2(out).out;
    }

    Eigen::VectorXd v = flatten(act);
    Eigen::MatrixXd h1 = layer_product(w.fc1, v, mapped, 3);
    if (folded)
        h1.colwise() += mapped->fold_bias[3];
    else
        bn_inference(h1, w.fc_bn.gain, w.fc_bn.bias, w.fc_bn.mean, w.fc_bn.var);
    relu(h1);
    const Eigen::MatrixXd logits = layer_product(w.fc2, h1, mapped, 4);
    return logits.col(0);
}

Eigen::VectorXd forward_probs(const NetworkSpec& spec, const LayerWeights& w, const Tensor3& x,
                              const MappedNetwork* mapped) {
    return softmax(forward_logits(spec, w, x, mapped));
}

Tensor3 standardize(const Tensor3& x, const Eigen::VectorXd& mean, const Eigen::VectorXd& std) {
    Tensor3 out = x;
    for (int c = 0; c < x.c; ++c) {
        const double m = mean(c);
        const double s = std(c) > 0.0 ? std(c) : 1.0;
        for (int p = 0; p < x.h * x.w; ++p) {
            auto& v = out.data[static_cast<std::size_t>(c) * x.h * x.w + p];
            v = (v - m) / s;
        }
    }
    return out;
}

}  // namespace memseize
