#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "memseize/crossbar.hpp"

using namespace memseize;

namespace {

DeviceParameters ideal_devices() { return DeviceParameters{}; }

DeviceParameters devices_with(double sigma, int n_states) {
    DeviceParameters p;
    p.sigma = sigma;
    p.n_states = n_states;
    return p;
}

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = (2.0 * rng.next_double() - 1.0) * scale;
    return m;
}

constexpr double kGOn = 1.0 / 100.0;
constexpr double kGOff = 1.0 / 2500.0;

}  // namespace

TEST_CASE("partition uses ceiling arithmetic") {
    const TileConfig tile;
    CHECK(partition(550, 16, tile) == std::pair<int, int>{5, 1});
    CHECK(partition(128, 128, tile) == std::pair<int, int>{1, 1});
    CHECK(partition(640, 256, tile) == std::pair<int, int>{5, 2});
    CHECK(partition(1, 1, tile) == std::pair<int, int>{1, 1});
    CHECK_THROWS_AS(partition(0, 4, tile), std::invalid_argument);
}

TEST_CASE("double-column mapping hits the conductance endpoints") {
    const TileConfig tile;
    SUBCASE("w = +1") {
        Eigen::MatrixXd w(1, 1);
        w << 1.0;
        const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), tile, 3);
        CHECK(layer.g_pos(0, 0) == doctest::Approx(kGOn).epsilon(1e-12));
        CHECK(layer.g_neg(0, 0) == doctest::Approx(kGOff).epsilon(1e-12));
        CHECK(layer.k_scale * (layer.g_pos(0, 0) - layer.g_neg(0, 0)) ==
              doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("w = -1 mirrors the grids") {
        Eigen::MatrixXd w(1, 1);
        w << -1.0;
        const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), tile, 3);
        CHECK(layer.g_pos(0, 0) == doctest::Approx(kGOff).epsilon(1e-12));
        CHECK(layer.g_neg(0, 0) == doctest::Approx(kGOn).epsilon(1e-12));
        CHECK(layer.k_scale * (layer.g_pos(0, 0) - layer.g_neg(0, 0)) ==
              doctest::Approx(-1.0).epsilon(1e-12));
    }
    SUBCASE("mixed weights invert through K") {
        Eigen::MatrixXd w(2, 1);
        w << 0.5, -0.25;
        const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), tile, 3);
        for (int i = 0; i < 2; ++i) {
            const double recovered = layer.k_scale * (layer.g_pos(i, 0) - layer.g_neg(i, 0));
            CHECK(recovered == doctest::Approx(w(i, 0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("all-zero weights park every cell at g_off with K = 1") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 2);
    const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, 1);
    CHECK(layer.k_scale == 1.0);
    CHECK(layer.g_pos.maxCoeff() == doctest::Approx(kGOff).epsilon(1e-12));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
    const Eigen::VectorXd y = vmm(layer, ones);
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite weights are rejected") {
    Eigen::MatrixXd w(1, 2);
    w << 1.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, 1),
                    std::invalid_argument);
}

TEST_CASE("vmm reproduces the identity") {
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(2, 2);
    const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, 5);
    Eigen::VectorXd x(2);
    x << 3.0, -4.0;
    const Eigen::VectorXd y = vmm(layer, x);
    CHECK(y(0) == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(y(1) == doctest::Approx(-4.0).epsilon(1e-9));
}

TEST_CASE("ideal vmm equals the floating-point product") {
    Rng rng(2024);
    for (int trial = 0; trial < 120; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_below(40));
        const int cols = 1 + static_cast<int>(rng.next_below(20));
        const Eigen::MatrixXd w = random_matrix(rng, rows, cols);
        const Eigen::VectorXd x = random_matrix(rng, rows, 1, 2.0);
        const MappedLayer layer =
            map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, rng.next_u64());
        const Eigen::VectorXd y = vmm(layer, x);
        const Eigen::VectorXd ref = w.transpose() * x;
        const double denom = std::max(ref.norm(), 1e-300);
        CHECK((y - ref).norm() / denom < 1e-9);
    }
}

TEST_CASE("vmm handles an all-zero input") {
    Rng rng(3);
    const Eigen::MatrixXd w = random_matrix(rng, 5, 4);
    const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, 8);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(5);
    const Eigen::VectorXd y = vmm(layer, zero);
    CHECK(y.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("vmm rejects dimension mismatches") {
    const Eigen::MatrixXd w = Eigen::MatrixXd::Ones(4, 3);
    const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), {}, 8);
    const Eigen::VectorXd bad = Eigen::VectorXd::Ones(5);
    CHECK_THROWS_AS(vmm(layer, bad), std::invalid_argument);
}

TEST_CASE("two-state quantization error stays within the column-sum bound") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::MatrixXd w = random_matrix(rng, 4, 3);
        const Eigen::VectorXd x = random_matrix(rng, 4, 1, 2.0);
        const MappedLayer layer =
            map_weights(w, WeightScheme::DoubleColumn, devices_with(0.0, 2), {}, rng.next_u64());
        const Eigen::VectorXd y = vmm(layer, x);
        const Eigen::VectorXd ref = w.transpose() * x;
        const double bound =
            layer.k_scale * 0.5 * (kGOn - kGOff) * x.cwiseAbs().sum() * (1.0 + 1e-9);
        for (int j = 0; j < 3; ++j) CHECK(std::abs(y(j) - ref(j)) <= bound);
    }
}

TEST_CASE("outputs are invariant to the tile partition") {
    Rng rng(55);
    const Eigen::MatrixXd w = random_matrix(rng, 300, 150);
    const Eigen::VectorXd x = random_matrix(rng, 300, 1, 1.5);
    std::vector<Eigen::VectorXd> results;
    for (const int size : {16, 64, 128}) {
        TileConfig tile;
        tile.rows = tile.cols = size;
        const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn, ideal_devices(), tile, 9);
        results.push_back(vmm(layer, x));
    }
    for (std::size_t i = 1; i < results.size(); ++i) {
        const double denom = std::max(results[0].norm(), 1e-300);
        CHECK((results[i] - results[0]).norm() / denom < 1e-12);
    }
}

TEST_CASE("mapping is deterministic per seed") {
    Rng rng(6);
    const Eigen::MatrixXd w = random_matrix(rng, 20, 10);
    const MappedLayer a = map_weights(w, WeightScheme::DoubleColumn, devices_with(250.0, 4), {}, 42);
    const MappedLayer b = map_weights(w, WeightScheme::DoubleColumn, devices_with(250.0, 4), {}, 42);
    CHECK(a.g_pos == b.g_pos);
    CHECK(a.g_neg == b.g_neg);
    const MappedLayer c = map_weights(w, WeightScheme::DoubleColumn, devices_with(250.0, 4), {}, 43);
    CHECK(a.g_pos != c.g_pos);
}

TEST_CASE("mean vmm error grows with sigma and shrinks with more states") {
    Rng rng(99);
    const int trials = 120;

    auto mean_error = [&](double sigma, int n_states, std::uint64_t salt) {
        Rng local(salt);
        double total = 0.0;
        for (int t = 0; t < trials; ++t) {
            const Eigen::MatrixXd w = random_matrix(local, 12, 6);
            const Eigen::VectorXd x = random_matrix(local, 12, 1, 2.0);
            const MappedLayer layer = map_weights(w, WeightScheme::DoubleColumn,
                                                  devices_with(sigma, n_states), {}, local.next_u64());
            total += (vmm(layer, x) - w.transpose() * x).cwiseAbs().mean();
        }
        return total / trials;
    };

    SUBCASE("non-decreasing in sigma at fixed states") {
        double prev = -1.0;
        for (const double sigma : {0.0, 100.0, 300.0, 500.0}) {
            const double err = mean_error(sigma, 4, 1234);
            CHECK(err >= prev);
            prev = err;
        }
    }
    SUBCASE("non-increasing in state count at sigma = 0") {
        double prev = std::numeric_limits<double>::infinity();
        for (const int n : {2, 3, 4, 6, 8, 10}) {
            const double err = mean_error(0.0, n, 4321);
            CHECK(err <= prev);
            prev = err;
        }
    }
    (void)rng;
}

TEST_CASE("single-column scheme carries the mirror-offset residual") {
    // With the mean-resistance mirror offset the single-column output is
    // W^T x plus K*(g_mid + g_m) * sum(x): the offset cancels the
    // resistance midpoint, not the conductance midpoint, so a systematic
    // term proportional to the input sum remains.
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const int rows = 1 + static_cast<int>(rng.next_below(20));
        const int cols = 1 + static_cast<int>(rng.next_below(8));
        const Eigen::MatrixXd w = random_matrix(rng, rows, cols);
        const Eigen::VectorXd x = random_matrix(rng, rows, 1, 2.0);
        const MappedLayer layer =
            map_weights(w, WeightScheme::SingleColumn, ideal_devices(), {}, rng.next_u64());
        CHECK(layer.g_m == doctest::Approx(-2.0 / 2600.0).epsilon(1e-12));

        const double g_mid = 0.5 * (kGOn + kGOff);
        const double residual = layer.k_scale * (g_mid + layer.g_m) * x.sum();
        const Eigen::VectorXd expected =
            (w.transpose() * x).array() + residual;
        const Eigen::VectorXd y = vmm(layer, x);
        const double denom = std::max(expected.norm(), 1e-300);
        CHECK((y - expected).norm() / denom < 1e-9);
    }
}

TEST_CASE("single-column conductance map inverts algebraically") {
    Rng rng(13);
    const Eigen::MatrixXd w = random_matrix(rng, 6, 4);
    const MappedLayer layer = map_weights(w, WeightScheme::SingleColumn, ideal_devices(), {}, 2);
    const double mid = kGOff + 0.5 * (kGOn - kGOff);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 4; ++j) {
            const double recovered = layer.k_scale * (layer.g_pos(i, j) - mid);
            CHECK(recovered == doctest::Approx(w(i, j)).epsilon(1e-9));
        }
}
