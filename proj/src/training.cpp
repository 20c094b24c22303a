#include "memseize/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace memseize {

double nll_loss(const Eigen::MatrixXd& log_probs, const std::vector<int>& targets) {
    if (static_cast<std::size_t>(log_probs.rows()) != targets.size())
        throw std::invalid_argument("nll_loss: batch size mismatch");
    double sum = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const int t = targets[i];
        if (t < 0 || t >= log_probs.cols())
            throw std::invalid_argument("nll_loss: target out of range");
        sum -= log_probs(static_cast<Eigen::Index>(i), t);
    }
    return sum / static_cast<double>(targets.size());
}

void DiffGrad::init(const std::vector<Eigen::Index>& sizes) {
    step = 0;
    m.clear();
    v.clear();
    g_prev.clear();
    for (const Eigen::Index n : sizes) {
        m.push_back(Eigen::ArrayXd::Zero(n));
        v.push_back(Eigen::ArrayXd::Zero(n));
        g_prev.push_back(Eigen::ArrayXd::Zero(n));
    }
}

void DiffGrad::update(std::vector<double*>& params, const std::vector<Eigen::ArrayXd>& grads,
                      bool unit_friction) {
    if (grads.size() != m.size()) throw std::invalid_argument("diffgrad: parameter count mismatch");
    ++step;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    for (std::size_t p = 0; p < grads.size(); ++p) {
        const Eigen::ArrayXd& g = grads[p];
        if (!g.allFinite()) throw std::runtime_error("diffgrad: non-finite gradient");
        m[p] = beta1 * m[p] + (1.0 - beta1) * g;
        v[p] = beta2 * v[p] + (1.0 - beta2) * g.square();
        const Eigen::ArrayXd m_hat = m[p] / bc1;
        const Eigen::ArrayXd v_hat = v[p] / bc2;
        Eigen::ArrayXd xi;
        if (unit_friction)
            xi = Eigen::ArrayXd::Ones(g.size());
        else
            xi = 1.0 / (1.0 + (-(g_prev[p] - g).abs()).exp());
        Eigen::Map<Eigen::ArrayXd> theta(params[p], g.size());
        theta -= lr * xi * m_hat / (v_hat.sqrt() + eps);
        g_prev[p] = g;
    }
}

FoldPlan stratified_kfold(const std::vector<int>& labels, const std::vector<bool>& synthetic,
                          int k, std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("stratified_kfold: k must be >= 2");
    if (labels.size() != synthetic.size())
        throw std::invalid_argument("stratified_kfold: flag count mismatch");
    std::array<std::vector<int>, 2> real_by_class;
    std::vector<int> synthetic_ids;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1)
            throw std::invalid_argument("stratified_kfold: labels must be 0/1");
        if (synthetic[i])
            synthetic_ids.push_back(static_cast<int>(i));
        else
            real_by_class[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
    }
    for (int c = 0; c < 2; ++c)
        if (real_by_class[static_cast<std::size_t>(c)].size() < static_cast<std::size_t>(k))
            throw std::invalid_argument("stratified_kfold: class " + std::to_string(c) +
                                        " has fewer than k real samples");

    const Rng base(seed);
    FoldPlan plan;
    plan.k = k;
    plan.val.resize(static_cast<std::size_t>(k));
    plan.train.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < 2; ++c) {
        auto& ids = real_by_class[static_cast<std::size_t>(c)];
        Rng rng = base.derive(static_cast<std::uint64_t>(c));
        for (std::size_t i = ids.size(); i > 1; --i)
            std::swap(ids[i - 1], ids[rng.next_below(i)]);
        for (std::size_t i = 0; i < ids.size(); ++i)
            plan.val[i % static_cast<std::size_t>(k)].push_back(ids[i]);
    }
    for (int f = 0; f < k; ++f) {
        auto& val = plan.val[static_cast<std::size_t>(f)];
        std::sort(val.begin(), val.end());
        std::vector<bool> in_val(labels.size(), false);
        for (const int id : val) in_val[static_cast<std::size_t>(id)] = true;
        auto& train = plan.train[static_cast<std::size_t>(f)];
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (!in_val[i] && !synthetic[i]) train.push_back(static_cast<int>(i));
        train.insert(train.end(), synthetic_ids.begin(), synthetic_ids.end());
        std::sort(train.begin(), train.end());
    }
    return plan;
}

Eigen::MatrixXd forward_train(const NetworkSpec& spec, const LayerWeights& w,
                              const std::vector<Tensor3>& batch, TrainBatchCache& cache) {
    const std::size_t n = batch.size();
    std::vector<FeatureMap> act(n);
    for (std::size_t s = 0; s < n; ++s) act[s] = to_feature_map(batch[s]);

    for (std::size_t l = 0; l < 3; ++l) {
        const auto& cv = spec.conv[l];
        const auto [oh, ow] = conv_output_shape(act[0].h, act[0].w, cv.kh, cv.kw, cv.sh, cv.sw);
        cache.conv_hw[l] = {oh, ow};
        cache.cols[l].resize(n);
        std::vector<Eigen::MatrixXd> z(n);
        for (std::size_t s = 0; s < n; ++s) {
            cache.cols[l][s] = im2col(act[s], cv.kh, cv.kw, cv.sh, cv.sw);
            z[s] = w.conv[l] * cache.cols[l][s];
        }
        bn_forward_train(z, w.conv_bn[l].gain, w.conv_bn[l].bias, cache.bn[l]);
        cache.pre_relu[l] = z;
        cache.pool_arg[l].resize(n);
        for (std::size_t s = 0; s < n; ++s) {
            relu(z[s]);
            FeatureMap fm;
            fm.h = oh;
            fm.w = ow;
            fm.m = std::move(z[s]);
            PoolResult pr = maxpool2(fm);
            cache.pool_arg[l][s] = std::move(pr.argmax);
            act[s] = std::move(pr.out);
        }
        cache.pool_hw[l] = {act[0].h, act[0].w};
    }

    cache.fc_in.resize(spec.fc1_in(), static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s)
        cache.fc_in.col(static_cast<Eigen::Index>(s)) = flatten(act[s]);

    std::vector<Eigen::MatrixXd> h{w.fc1 * cache.fc_in};
    bn_forward_train(h, w.fc_bn.gain, w.fc_bn.bias, cache.fc_bn);
    cache.fc_pre_relu = h[0];
    relu(h[0]);
    cache.fc_hidden = h[0];
    const Eigen::MatrixXd logits = w.fc2 * h[0];

    Eigen::MatrixXd log_probs(static_cast<Eigen::Index>(n), spec.classes);
    for (std::size_t s = 0; s < n; ++s)
        log_probs.row(static_cast<Eigen::Index>(s)) =
            log_softmax(logits.col(static_cast<Eigen::Index>(s))).transpose();
    return log_probs;
}

Gradients backward_train(const NetworkSpec& spec, const LayerWeights& w,
                         const Eigen::MatrixXd& log_probs, const std::vector<int>& targets,
                         const TrainBatchCache& cache) {
    const std::size_t n = targets.size();
    const double inv_n = 1.0 / static_cast<double>(n);

    // d(mean nll)/d logits = (softmax - onehot) / n, per sample column.
    Eigen::MatrixXd dlogits(spec.classes, static_cast<Eigen::Index>(n));
    for (std::size_t s = 0; s < n; ++s) {
        dlogits.col(static_cast<Eigen::Index>(s)) =
            (log_probs.row(static_cast<Eigen::Index>(s)).transpose().array().exp() * inv_n)
                .matrix();
        dlogits(targets[s], static_cast<Eigen::Index>(s)) -= inv_n;
    }

    Gradients g;
    g.fc2 = dlogits * cache.fc_hidden.transpose();
    Eigen::MatrixXd dh = w.fc2.transpose() * dlogits;
    dh = relu_backward(dh, cache.fc_pre_relu);
    {
        std::vector<Eigen::MatrixXd> dx;
        bn_backward({dh}, cache.fc_bn, w.fc_bn.gain, dx, g.fc_gain, g.fc_bias);
        dh = std::move(dx[0]);
    }
    g.fc1 = dh * cache.fc_in.transpose();
    const Eigen::MatrixXd dflat = w.fc1.transpose() * dh;

    // Reshape flattened gradients back to pool3 feature maps.
    std::vector<FeatureMap> dact(n);
    const auto [p3h, p3w] = cache.pool_hw[2];
    const int c3 = spec.conv[2].filters;
    for (std::size_t s = 0; s < n; ++s) {
        dact[s].h = p3h;
        dact[s].w = p3w;
        dact[s].m.resize(c3, static_cast<Eigen::Index>(p3h) * p3w);
        Eigen::Index k = 0;
        for (Eigen::Index ci = 0; ci < c3; ++ci)
            for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(p3h) * p3w; ++p)
                dact[s].m(ci, p) = dflat(k++, static_cast<Eigen::Index>(s));
    }

    for (int l = 2; l >= 0; --l) {
        const std::size_t lu = static_cast<std::size_t>(l);
        const auto& cv = spec.conv[lu];
        const auto [ch_, cw_] = cache.conv_hw[lu];
        std::vector<Eigen::MatrixXd> dz(n);
        for (std::size_t s = 0; s < n; ++s) {
            const FeatureMap dpool =
                maxpool2_backward(dact[s], cache.pool_arg[lu][s], cv.filters, ch_, cw_);
            dz[s] = relu_backward(dpool.m, cache.pre_relu[lu][s]);
        }
        std::vector<Eigen::MatrixXd> dpre;
        bn_backward(dz, cache.bn[lu], w.conv_bn[lu].gain, dpre, g.conv_gain[lu],
                    g.conv_bias[lu]);
        g.conv[lu] = Eigen::MatrixXd::Zero(w.conv[lu].rows(), w.conv[lu].cols());
        for (std::size_t s = 0; s < n; ++s) {
            g.conv[lu] += dpre[s] * cache.cols[lu][s].transpose();
            if (l > 0) {
                const auto [prev_h, prev_w] = cache.pool_hw[lu - 1];
                const int prev_c = spec.conv[lu - 1].filters;
                const Eigen::MatrixXd dcols = w.conv[lu].transpose() * dpre[s];
                dact[s] = col2im(dcols, prev_c, prev_h, prev_w, cv.kh, cv.kw, cv.sh, cv.sw);
            }
        }
    }
    return g;
}

namespace {

std::vector<double*> parameter_views(LayerWeights& w) {
    std::vector<double*> p;
    for (int l = 0; l < 3; ++l) {
        p.push_back(w.conv[static_cast<std::size_t>(l)].data());
        p.push_back(w.conv_bn[static_cast<std::size_t>(l)].gain.data());
        p.push_back(w.conv_bn[static_cast<std::size_t>(l)].bias.data());
    }
    p.push_back(w.fc1.data());
    p.push_back(w.fc_bn.gain.data());
    p.push_back(w.fc_bn.bias.data());
    p.push_back(w.fc2.data());
    return p;
}

std::vector<Eigen::Index> parameter_sizes(const LayerWeights& w) {
    std::vector<Eigen::Index> sizes;
    for (int l = 0; l < 3; ++l) {
        sizes.push_back(w.conv[static_cast<std::size_t>(l)].size());
        sizes.push_back(w.conv_bn[static_cast<std::size_t>(l)].gain.size());
        sizes.push_back(w.conv_bn[static_cast<std::size_t>(l)].bias.size());
    }
    sizes.push_back(w.fc1.size());
    sizes.push_back(w.fc_bn.gain.size());
    sizes.push_back(w.fc_bn.bias.size());
    sizes.push_back(w.fc2.size());
    return sizes;
}

std::vector<Eigen::ArrayXd> gradient_arrays(const Gradients& g) {
    std::vector<Eigen::ArrayXd> out;
    auto push_mat = [&out](const Eigen::MatrixXd& m) {
        out.emplace_back(Eigen::Map<const Eigen::ArrayXd>(m.data(), m.size()));
    };
    auto push_vec = [&out](const Eigen::VectorXd& v) {
        out.emplace_back(Eigen::Map<const Eigen::ArrayXd>(v.data(), v.size()));
    };
    for (int l = 0; l < 3; ++l) {
        push_mat(g.conv[static_cast<std::size_t>(l)]);
        push_vec(g.conv_gain[static_cast<std::size_t>(l)]);
        push_vec(g.conv_bias[static_cast<std::size_t>(l)]);
    }
    push_mat(g.fc1);
    push_vec(g.fc_gain);
    push_vec(g.fc_bias);
    push_mat(g.fc2);
    return out;
}

}  // namespace

TrainResult train_fold(const NetworkSpec& spec, const Dataset& ds, const FoldPlan& plan,
                       int fold, const TrainingParams& params, std::uint64_t seed) {
    if (fold < 0 || fold >= plan.k) throw std::invalid_argument("train_fold: bad fold index");
    const auto& train_ids = plan.train[static_cast<std::size_t>(fold)];
    if (train_ids.empty()) throw std::invalid_argument("train_fold: empty training split");

    // Per-channel standardization fitted on the training split only.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(spec.channels);
    Eigen::VectorXd sq = Eigen::VectorXd::Zero(spec.channels);
    const std::size_t per_channel = static_cast<std::size_t>(spec.frames) * spec.bins;
    for (const int id : train_ids) {
        const float* base = ds.data.data() + static_cast<std::size_t>(id) * ds.window_values();
        for (int c = 0; c < spec.channels; ++c)
            for (std::size_t p = 0; p < per_channel; ++p) {
                const double v = base[static_cast<std::size_t>(c) * per_channel + p];
                mean(c) += v;
                sq(c) += v * v;
            }
    }
    const double count = static_cast<double>(train_ids.size()) * static_cast<double>(per_channel);
    mean /= count;
    Eigen::VectorXd stddev =
        (sq / count - mean.cwiseProduct(mean)).cwiseMax(0.0).cwiseSqrt();
    for (int c = 0; c < spec.channels; ++c)
        if (stddev(c) <= 0.0) stddev(c) = 1.0;

    const Rng base_rng(seed);
    Rng init_rng = base_rng.derive(0x11ull * static_cast<std::uint64_t>(fold) + 1);
    TrainResult result;
    result.weights = LayerWeights::init(spec, init_rng);
    result.weights.norm_mean = mean;
    result.weights.norm_std = stddev;
    LayerWeights& w = result.weights;

    // Running batch-norm statistics for inference.
    const double momentum = 0.1;
    std::array<Eigen::VectorXd, 3> run_mean, run_var;
    for (int l = 0; l < 3; ++l) {
        run_mean[static_cast<std::size_t>(l)] = w.conv_bn[static_cast<std::size_t>(l)].mean;
        run_var[static_cast<std::size_t>(l)] = w.conv_bn[static_cast<std::size_t>(l)].var;
    }
    Eigen::VectorXd fc_run_mean = w.fc_bn.mean, fc_run_var = w.fc_bn.var;

    DiffGrad opt;
    opt.lr = params.lr;
    opt.init(parameter_sizes(w));
    std::vector<double*> views = parameter_views(w);

    std::vector<int> order(train_ids.begin(), train_ids.end());
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        Rng shuffle_rng =
            base_rng.derive(0x1000ull + static_cast<std::uint64_t>(epoch) * plan.k +
                            static_cast<std::uint64_t>(fold));
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);

        double loss_sum = 0.0;
        long correct = 0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(params.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(params.batch));
            std::vector<Tensor3> batch;
            std::vector<int> targets;
            for (std::size_t i = start; i < stop; ++i) {
                batch.push_back(
                    standardize(ds.window(static_cast<std::size_t>(order[i])), mean, stddev));
                targets.push_back(ds.index[static_cast<std::size_t>(order[i])].label ==
                                          WindowClass::Preictal
                                      ? 1
                                      : 0);
            }
            TrainBatchCache cache;
            const Eigen::MatrixXd log_probs = forward_train(spec, w, batch, cache);
            const double loss = nll_loss(log_probs, targets);
            if (!std::isfinite(loss))
                throw std::runtime_error("train: loss diverged at epoch " +
                                         std::to_string(epoch));
            loss_sum += loss * static_cast<double>(targets.size());
            seen += targets.size();
            for (std::size_t s = 0; s < targets.size(); ++s) {
                Eigen::Index pred = 0;
                log_probs.row(static_cast<Eigen::Index>(s)).maxCoeff(&pred);
                correct += pred == targets[s] ? 1 : 0;
            }

            for (int l = 0; l < 3; ++l) {
                auto& bn = cache.bn[static_cast<std::size_t>(l)];
                run_mean[static_cast<std::size_t>(l)] =
                    (1.0 - momentum) * run_mean[static_cast<std::size_t>(l)] + momentum * bn.mean;
                run_var[static_cast<std::size_t>(l)] =
                    (1.0 - momentum) * run_var[static_cast<std::size_t>(l)] + momentum * bn.var;
            }
            fc_run_mean = (1.0 - momentum) * fc_run_mean + momentum * cache.fc_bn.mean;
            fc_run_var = (1.0 - momentum) * fc_run_var + momentum * cache.fc_bn.var;

            const Gradients grads = backward_train(spec, w, log_probs, targets, cache);
            const std::vector<Eigen::ArrayXd> flat = gradient_arrays(grads);
            opt.update(views, flat);
        }
        result.log.push_back({epoch, fold, loss_sum / static_cast<double>(seen),
                              static_cast<double>(correct) / static_cast<double>(seen)});
    }

    for (int l = 0; l < 3; ++l) {
        w.conv_bn[static_cast<std::size_t>(l)].mean = run_mean[static_cast<std::size_t>(l)];
        w.conv_bn[static_cast<std::size_t>(l)].var = run_var[static_cast<std::size_t>(l)];
    }
    w.fc_bn.mean = fc_run_mean;
    w.fc_bn.var = fc_run_var;
    return result;
}

}  // namespace memseize
