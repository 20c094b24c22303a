#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "memseize/device.hpp"

using namespace memseize;

namespace {

// Closed-form mean/std of max(N(mu, sigma^2), a).
struct ClampedNormal {
    double mean, stddev;
};

ClampedNormal clamped_moments(double mu, double sigma, double a) {
    const double alpha = (a - mu) / sigma;
    const double cdf = 0.5 * std::erfc(-alpha / std::sqrt(2.0));
    const double pdf = std::exp(-0.5 * alpha * alpha) / std::sqrt(2.0 * M_PI);
    const double m1 = a * cdf + mu * (1.0 - cdf) + sigma * pdf;
    const double m2 = a * a * cdf + (mu * mu + sigma * sigma) * (1.0 - cdf) + (mu + a) * sigma * pdf;
    return {m1, std::sqrt(m2 - m1 * m1)};
}

DeviceParameters params_with(double sigma, int n_states = kContinuousStates) {
    DeviceParameters p;
    p.sigma = sigma;
    p.n_states = n_states;
    return p;
}

}  // namespace

TEST_CASE("zero variance sampling is exact") {
    Rng rng(1);
    const DeviceInstance dev = sample_device(params_with(0.0), rng);
    CHECK(dev.r_on == 100.0);
    CHECK(dev.r_off == 2500.0);
    CHECK(dev.g_lo() == doctest::Approx(4.0e-4).epsilon(1e-12));
    CHECK(dev.g_hi() == doctest::Approx(1.0e-2).epsilon(1e-12));
}

TEST_CASE("sampling matches the clamped normal distribution at sigma=100") {
    const int n = 100000;
    Rng rng(42);
    double on_sum = 0.0, on_sq = 0.0, off_sum = 0.0, off_sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const DeviceInstance dev = sample_device(params_with(100.0), rng);
        on_sum += dev.r_on;
        on_sq += dev.r_on * dev.r_on;
        off_sum += dev.r_off;
        off_sq += dev.r_off * dev.r_off;
    }
    const double on_mean = on_sum / n;
    const double on_std = std::sqrt(on_sq / n - on_mean * on_mean);
    const double off_mean = off_sum / n;
    const double off_std = std::sqrt(off_sq / n - off_mean * off_mean);

    // r_min clamping shifts the R_ON moments; the oracle accounts for it.
    const ClampedNormal on_ref = clamped_moments(100.0, 100.0, 1.0);
    CHECK(on_mean == doctest::Approx(on_ref.mean).epsilon(0.02));
    CHECK(on_std == doctest::Approx(on_ref.stddev).epsilon(0.02));
    // R_OFF uses 2*sigma and clamping is negligible there.
    CHECK(off_mean == doctest::Approx(2500.0).epsilon(0.002));
    CHECK(off_std == doctest::Approx(200.0).epsilon(0.03));
    CHECK(std::abs(off_std - 200.0) < 6.0);
}

TEST_CASE("sigma=400 produces overlapped devices") {
    const int n = 100000;
    Rng rng(7);
    int overlapped = 0;
    for (int i = 0; i < n; ++i) {
        const DeviceInstance dev = sample_device(params_with(400.0), rng);
        overlapped += dev.r_on > dev.r_off ? 1 : 0;
    }
    const double fraction = static_cast<double>(overlapped) / n;
    CHECK(fraction > 0.0);
    CHECK(fraction == doctest::Approx(0.003645).epsilon(0.5));
}

TEST_CASE("sampling is deterministic per seed") {
    for (const double sigma : {0.0, 100.0, 500.0}) {
        Rng a(99), b(99);
        for (int i = 0; i < 100; ++i) {
            const DeviceInstance da = sample_device(params_with(sigma, 4), a);
            const DeviceInstance db = sample_device(params_with(sigma, 4), b);
            REQUIRE(da.r_on == db.r_on);
            REQUIRE(da.r_off == db.r_off);
            REQUIRE(da.states == db.states);
        }
    }
}

TEST_CASE("build_states spaces conductances uniformly") {
    SUBCASE("two states are the endpoints") {
        const auto s = build_states(100.0, 2500.0, 2);
        REQUIRE(s.size() == 2);
        CHECK(s[0] == doctest::Approx(4.0e-4).epsilon(1e-12));
        CHECK(s[1] == doctest::Approx(1.0e-2).epsilon(1e-12));
    }
    SUBCASE("three states insert the midpoint") {
        const auto s = build_states(100.0, 2500.0, 3);
        REQUIRE(s.size() == 3);
        CHECK(s[1] == doctest::Approx(5.2e-3).epsilon(1e-12));
        CHECK(s[1] - s[0] == doctest::Approx(4.8e-3).epsilon(1e-12));
        CHECK(s[2] - s[1] == doctest::Approx(4.8e-3).epsilon(1e-12));
    }
    SUBCASE("degenerate equal resistances collapse to one state") {
        const auto s = build_states(100.0, 100.0, 5);
        REQUIRE(s.size() == 1);
        CHECK(s[0] == doctest::Approx(1.0e-2).epsilon(1e-12));
    }
    SUBCASE("inverted range degenerates to the sorted pair") {
        const auto s = build_states(500.0, 200.0, 6);
        REQUIRE(s.size() == 2);
        CHECK(s[0] == doctest::Approx(1.0 / 500.0).epsilon(1e-12));
        CHECK(s[1] == doctest::Approx(1.0 / 200.0).epsilon(1e-12));
    }
    SUBCASE("continuous means no states") { CHECK(build_states(100.0, 2500.0, 0).empty()); }
}

TEST_CASE("quantize projects to the nearest state") {
    DeviceInstance dev;
    dev.r_on = 100.0;
    dev.r_off = 2500.0;

    SUBCASE("nearest of two states") {
        dev.states = {4.0e-4, 1.0e-2};
        CHECK(quantize(6.0e-3, dev) == 1.0e-2);
    }
    SUBCASE("states are fixed points") {
        dev.states = {4.0e-4, 1.0e-2};
        CHECK(quantize(1.0e-2, dev) == 1.0e-2);
    }
    SUBCASE("midpoint ties break toward the lower state") {
        dev.states = {4.0e-4, 5.2e-3, 1.0e-2};
        CHECK(quantize(2.8e-3, dev) == 4.0e-4);
        dev.states = build_states(100.0, 2500.0, 3);
        CHECK(quantize(2.8e-3, dev) == dev.states[0]);
    }
    SUBCASE("continuous clamps to the device range") {
        dev.states.clear();
        CHECK(quantize(5.0e-2, dev) == doctest::Approx(1.0e-2).epsilon(1e-12));
        CHECK(quantize(1.0e-5, dev) == doctest::Approx(4.0e-4).epsilon(1e-12));
        CHECK(quantize(5.0e-3, dev) == 5.0e-3);
    }
}

TEST_CASE("quantize is idempotent and bounded") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const int n_states = 2 + static_cast<int>(rng.next_below(9));
        DeviceParameters p = params_with(rng.next_double() * 200.0, n_states);
        const DeviceInstance dev = sample_device(p, rng);
        const double g = dev.g_lo() + rng.next_double() * (dev.g_hi() - dev.g_lo());
        const double q = quantize(g, dev);
        CHECK(quantize(q, dev) == q);
        if (dev.states.size() == static_cast<std::size_t>(n_states)) {
            const double bound = (dev.g_hi() - dev.g_lo()) / (2.0 * (n_states - 1));
            CHECK(std::abs(g - q) <= bound * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("mirror offset follows the mean-resistance formula") {
    const double g_m = mirror_offset(100.0, 2500.0);
    CHECK(g_m == doctest::Approx(-2.0 / 2600.0).epsilon(1e-12));
    CHECK(std::abs(g_m - (-7.6923e-4)) < 1e-8);
    CHECK(mirror_offset(1.0, 1.0) == -1.0);
    for (const double r : {0.5, 3.0, 120.0, 9000.0})
        CHECK(mirror_offset(r, r) == doctest::Approx(-1.0 / r).epsilon(1e-12));
}

TEST_CASE("mirror offset is negative and satisfies g_m*(r_on+r_off) = -2") {
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        const double r_on = 1.0 + rng.next_double() * 1000.0;
        const double r_off = r_on + rng.next_double() * 5000.0;
        const double g_m = mirror_offset(r_on, r_off);
        CHECK(g_m < 0.0);
        CHECK(g_m * (r_on + r_off) == doctest::Approx(-2.0).epsilon(1e-15));
    }
}

TEST_CASE("mirror offset rejects non-positive resistances") {
    CHECK_THROWS_AS(mirror_offset(0.0, 2500.0), std::invalid_argument);
    CHECK_THROWS_AS(mirror_offset(100.0, -5.0), std::invalid_argument);
}

TEST_CASE("device parameter validation") {
    DeviceParameters p;
    CHECK_NOTHROW(p.validate());
    p.n_states = 1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.n_states = kContinuousStates;
    p.sigma = -1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.sigma = 0.0;
    p.r_off_mean = 50.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
