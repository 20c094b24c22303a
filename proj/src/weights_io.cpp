#include <cstring>
#include <fstream>
#include <sstream>
#include <type_traits>

#include "memseize/network.hpp"
#include "memseize/util.hpp"

namespace memseize {

namespace fs = std::filesystem;

namespace {

struct TensorRef {
    std::string name;
    std::vector<int> shape;
    const Eigen::MatrixXd* mat = nullptr;   // row-major serialization
    const Eigen::VectorXd* vec = nullptr;
    Eigen::MatrixXd* mat_out = nullptr;
    Eigen::VectorXd* vec_out = nullptr;
};

template <typename W>
std::vector<TensorRef> container_layout(const NetworkSpec& spec, W& w) {
    std::vector<TensorRef> refs;
    auto add_mat = [&refs](std::string name, std::vector<int> shape, auto& m) {
        TensorRef r;
        r.name = std::move(name);
        r.shape = std::move(shape);
        if constexpr (std::is_const_v<W>)
            r.mat = &m;
        else
            r.mat_out = &m;
        refs.push_back(std::move(r));
    };
    auto add_vec = [&refs](std::string name, int len, auto& v) {
        TensorRef r;
        r.name = std::move(name);
        r.shape = {len};
        if constexpr (std::is_const_v<W>)
            r.vec = &v;
        else
            r.vec_out = &v;
        refs.push_back(std::move(r));
    };

    int in_c = spec.channels;
    for (int l = 0; l < 3; ++l) {
        const auto& cv = spec.conv[static_cast<std::size_t>(l)];
        const std::string base = "conv" + std::to_string(l + 1);
        add_mat(base + ".weight", {cv.filters, in_c, cv.kh, cv.kw},
                w.conv[static_cast<std::size_t>(l)]);
        auto& bn = w.conv_bn[static_cast<std::size_t>(l)];
        add_vec(base + ".bn.gain", cv.filters, bn.gain);
        add_vec(base + ".bn.bias", cv.filters, bn.bias);
        add_vec(base + ".bn.mean", cv.filters, bn.mean);
        add_vec(base + ".bn.var", cv.filters, bn.var);
        in_c = cv.filters;
    }
    add_mat("fc1.weight", {spec.fc1_out, spec.fc1_in()}, w.fc1);
    add_vec("fc1.bn.gain", spec.fc1_out, w.fc_bn.gain);
    add_vec("fc1.bn.bias", spec.fc1_out, w.fc_bn.bias);
    add_vec("fc1.bn.mean", spec.fc1_out, w.fc_bn.mean);
    add_vec("fc1.bn.var", spec.fc1_out, w.fc_bn.var);
    add_mat("fc2.weight", {spec.classes, spec.fc1_out}, w.fc2);
    add_vec("input_norm.mean", spec.channels, w.norm_mean);
    add_vec("input_norm.std", spec.channels, w.norm_std);
    return refs;
}

std::size_t element_count(const std::vector<int>& shape) {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
}

}  // namespace

void save_weights(const fs::path& dir, const NetworkSpec& spec, const LayerWeights& w) {
    const auto refs = container_layout(spec, w);
    std::string blob;
    std::ostringstream manifest;
    for (const auto& r : refs) {
        manifest << r.name << ' ';
        for (std::size_t d = 0; d < r.shape.size(); ++d)
            manifest << (d ? "," : "") << r.shape[d];
        manifest << ' ' << blob.size() << '\n';
        auto push = [&blob](double v) {
            const float f = static_cast<float>(v);
            char bytes[4];
            std::memcpy(bytes, &f, 4);
            blob.append(bytes, 4);
        };
        if (r.mat != nullptr) {
            for (Eigen::Index i = 0; i < r.mat->rows(); ++i)
                for (Eigen::Index j = 0; j < r.mat->cols(); ++j) push((*r.mat)(i, j));
        } else {
            for (Eigen::Index i = 0; i < r.vec->size(); ++i) push((*r.vec)(i));
        }
    }
    fs::create_directories(dir);
    write_file_atomic(dir / "manifest", manifest.str());
    write_binary_atomic(dir / "weights.bin", blob.data(), blob.size());
}

LayerWeights load_weights(const fs::path& dir, const NetworkSpec& spec) {
    LayerWeights w = LayerWeights::zeros(spec);
    const auto refs = container_layout(spec, w);

    const std::string manifest = read_file(dir / "manifest");
    const std::string blob = read_file(dir / "weights.bin");

    std::istringstream lines(manifest);
    std::string line;
    std::size_t idx = 0;
    while (std::getline(lines, line)) {
        if (trim(line).empty()) continue;
        if (idx >= refs.size()) throw std::runtime_error("manifest: unexpected extra tensor");
        std::istringstream fields(line);
        std::string name, shape_str;
        std::size_t offset = 0;
        fields >> name >> shape_str >> offset;
        if (!fields) throw std::runtime_error("manifest: malformed line: " + line);
        const auto& r = refs[idx];
        if (name != r.name)
            throw std::runtime_error("manifest: expected tensor " + r.name + ", found " + name);
        std::vector<int> shape;
        for (const auto& part : split(shape_str, ',')) shape.push_back(std::stoi(part));
        if (shape != r.shape) throw std::runtime_error("manifest: shape mismatch for " + name);
        const std::size_t count = element_count(shape);
        if (offset + count * 4 > blob.size())
            throw std::runtime_error("weights.bin: truncated tensor " + name);
        auto pull = [&blob, &offset]() {
            float f;
            std::memcpy(&f, blob.data() + offset, 4);
            offset += 4;
            return static_cast<double>(f);
        };
        if (r.mat_out != nullptr) {
            for (Eigen::Index i = 0; i < r.mat_out->rows(); ++i)
                for (Eigen::Index j = 0; j < r.mat_out->cols(); ++j) (*r.mat_out)(i, j) = pull();
        } else {
            for (Eigen::Index i = 0; i < r.vec_out->size(); ++i) (*r.vec_out)(i) = pull();
        }
        ++idx;
    }
    if (idx != refs.size()) throw std::runtime_error("manifest: missing tensors");
    return w;
}

}  // namespace memseize
