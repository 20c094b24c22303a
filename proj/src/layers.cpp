#include "memseize/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace memseize {

FeatureMap to_feature_map(const Tensor3& t) {
    FeatureMap f;
    f.h = t.h;
    f.w = t.w;
    f.m.resize(t.c, static_cast<Eigen::Index>(t.h) * t.w);
    for (int ci = 0; ci < t.c; ++ci)
        for (int p = 0; p < t.h * t.w; ++p)
            f.m(ci, p) = t.data[static_cast<std::size_t>(ci) * t.h * t.w + p];
    return f;
}

Eigen::VectorXd flatten(const FeatureMap& f) {
    Eigen::VectorXd v(f.m.size());
    Eigen::Index k = 0;
    for (Eigen::Index ci = 0; ci < f.m.rows(); ++ci)
        for (Eigen::Index p = 0; p < f.m.cols(); ++p) v(k++) = f.m(ci, p);
    return v;
}

std::pair<int, int> conv_output_shape(int h, int w, int kh, int kw, int sh, int sw) {
    if (h < kh || w < kw) throw std::invalid_argument("kernel larger than input");
    return {(h - kh) / sh + 1, (w - kw) / sw + 1};
}

Eigen::MatrixXd im2col(const FeatureMap& x, int kh, int kw, int sh, int sw) {
    const int c = x.channels();
    const auto [oh, ow] = conv_output_shape(x.h, x.w, kh, kw, sh, sw);
    Eigen::MatrixXd cols(static_cast<Eigen::Index>(c) * kh * kw,
                         static_cast<Eigen::Index>(oh) * ow);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const Eigen::Index col = static_cast<Eigen::Index>(oy) * ow + ox;
            Eigen::Index row = 0;
            for (int ci = 0; ci < c; ++ci)
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx)
                        cols(row++, col) =
                            x.m(ci, static_cast<Eigen::Index>(oy * sh + ky) * x.w + ox * sw + kx);
        }
    return cols;
}

FeatureMap col2im(const Eigen::MatrixXd& dcols, int c, int h, int w, int kh, int kw, int sh,
                  int sw) {
    const auto [oh, ow] = conv_output_shape(h, w, kh, kw, sh, sw);
    FeatureMap dx;
    dx.h = h;
    dx.w = w;
    dx.m = Eigen::MatrixXd::Zero(c, static_cast<Eigen::Index>(h) * w);
    for (int oy = 0; oy < oh; ++oy)
        for (int ox = 0; ox < ow; ++ox) {
            const Eigen::Index col = static_cast<Eigen::Index>(oy) * ow + ox;
            Eigen::Index row = 0;
            for (int ci = 0; ci < c; ++ci)
                for (int ky = 0; ky < kh; ++ky)
                    for (int kx = 0; kx < kw; ++kx)
                        dx.m(ci, static_cast<Eigen::Index>(oy * sh + ky) * w + ox * sw + kx) +=
                            dcols(row++, col);
        }
    return dx;
}

PoolResult maxpool2(const FeatureMap& x) {
    const int c = x.channels();
    const int oh = x.h / 2, ow = x.w / 2;
    if (oh < 1 || ow < 1) throw std::invalid_argument("maxpool2: input too small");
    PoolResult r;
    r.out.h = oh;
    r.out.w = ow;
    r.out.m.resize(c, static_cast<Eigen::Index>(oh) * ow);
    r.argmax.resize(static_cast<std::size_t>(c) * oh * ow);
    for (int ci = 0; ci < c; ++ci)
        for (int oy = 0; oy < oh; ++oy)
            for (int ox = 0; ox < ow; ++ox) {
                double best = -std::numeric_limits<double>::infinity();
                Eigen::Index best_pos = 0;
                for (int dy = 0; dy < 2; ++dy)
                    for (int dx = 0; dx < 2; ++dx) {
                        const Eigen::Index pos =
                            static_cast<Eigen::Index>(oy * 2 + dy) * x.w + ox * 2 + dx;
                        if (x.m(ci, pos) > best) {  // first max wins ties
                            best = x.m(ci, pos);
                            best_pos = pos;
                        }
                    }
                const Eigen::Index out_pos = static_cast<Eigen::Index>(oy) * ow + ox;
                r.out.m(ci, out_pos) = best;
                r.argmax[static_cast<std::size_t>(ci) * oh * ow + out_pos] = best_pos;
            }
    return r;
}

FeatureMap maxpool2_backward(const FeatureMap& dy, const std::vector<Eigen::Index>& argmax,
                             int c, int in_h, int in_w) {
    FeatureMap dx;
    dx.h = in_h;
    dx.w = in_w;
    dx.m = Eigen::MatrixXd::Zero(c, static_cast<Eigen::Index>(in_h) * in_w);
    const Eigen::Index per_channel = dy.m.cols();
    for (int ci = 0; ci < c; ++ci)
        for (Eigen::Index p = 0; p < per_channel; ++p)
            dx.m(ci, argmax[static_cast<std::size_t>(ci) * per_channel + p]) += dy.m(ci, p);
    return dx;
}

void bn_forward_train(std::vector<Eigen::MatrixXd>& acts, const Eigen::VectorXd& gain,
                      const Eigen::VectorXd& bias, BnCache& cache) {
    const Eigen::Index c = acts.front().rows();
    Eigen::Index count = 0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(c);
    for (const auto& a : acts) {
        sum += a.rowwise().sum();
        count += a.cols();
    }
    cache.count = count;
    cache.mean = sum / static_cast<double>(count);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(c);
    for (const auto& a : acts)
        sq += (a.colwise() - cache.mean).array().square().matrix().rowwise().sum();
    cache.var = sq / static_cast<double>(count);
    cache.inv_std = (cache.var.array() + kBatchNormEps).rsqrt();
    cache.x_hat.resize(acts.size());
    for (std::size_t s = 0; s < acts.size(); ++s) {
        cache.x_hat[s] =
            ((acts[s].colwise() - cache.mean).array().colwise() * cache.inv_std.array())
                .matrix();
        acts[s] = ((cache.x_hat[s].array().colwise() * gain.array()).colwise() + bias.array())
                      .matrix();
    }
}

void bn_backward(const std::vector<Eigen::MatrixXd>& dout, const BnCache& cache,
                 const Eigen::VectorXd& gain, std::vector<Eigen::MatrixXd>& dx,
                 Eigen::VectorXd& dgain, Eigen::VectorXd& dbias) {
    const Eigen::Index c = dout.front().rows();
    dgain = Eigen::VectorXd::Zero(c);
    dbias = Eigen::VectorXd::Zero(c);
    for (std::size_t s = 0; s < dout.size(); ++s) {
        dbias += dout[s].rowwise().sum();
        dgain += (dout[s].array() * cache.x_hat[s].array()).matrix().rowwise().sum();
    }
    const double inv_n = 1.0 / static_cast<double>(cache.count);
    dx.resize(dout.size());
    for (std::size_t s = 0; s < dout.size(); ++s) {
        // dx = gain * inv_std * (dy - mean(dy) - x_hat * mean(dy * x_hat))
        Eigen::MatrixXd centered =
            dout[s].colwise() - (dbias * inv_n).eval();
        centered -= (cache.x_hat[s].array().colwise() * (dgain * inv_n).array()).matrix();
        dx[s] = (centered.array().colwise() * (gain.array() * cache.inv_std.array())).matrix();
    }
}

void bn_inference(Eigen::MatrixXd& act, const Eigen::VectorXd& gain, const Eigen::VectorXd& bias,
                  const Eigen::VectorXd& mean, const Eigen::VectorXd& var) {
    const Eigen::ArrayXd inv_std = (var.array() + kBatchNormEps).rsqrt();
    act = (((act.colwise() - mean).array().colwise() * (gain.array() * inv_std)).colwise() +
           bias.array())
              .matrix();
}

Eigen::MatrixXd relu_backward(const Eigen::MatrixXd& dy, const Eigen::MatrixXd& x) {
    return (x.array() > 0.0).select(dy, Eigen::MatrixXd::Zero(dy.rows(), dy.cols()));
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
    const double m = logits.maxCoeff();
    const Eigen::ArrayXd shifted = logits.array() - m;
    const double lse = std::log(shifted.exp().sum());
    return shifted - lse;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    return log_softmax(logits).array().exp();
}

}  // namespace memseize
