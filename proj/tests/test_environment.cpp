#include <cmath>
#include <vector>

#include <doctest.h>

#include "bragg/environment.hpp"

using namespace bragg;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& x)
{
    Moments m;
    for (double v : x) m.mean += v;
    m.mean /= static_cast<double>(x.size());
    for (double v : x) m.var += (v - m.mean) * (v - m.mean);
    m.var /= static_cast<double>(x.size() - 1);
    return m;
}

}  // namespace

TEST_CASE("random streams")
{
    auto a = make_rng(42, 7, RngStream::mirror);
    auto b = make_rng(42, 7, RngStream::mirror);
    auto c = make_rng(42, 7, RngStream::detection_lower);
    auto d = make_rng(42, 8, RngStream::mirror);
    auto e = make_rng(43, 7, RngStream::mirror);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    CHECK(x != e());
}

TEST_CASE("mirror phases")
{
    NoiseModel quiet;
    auto rng = make_rng(1, 0, RngStream::mirror);
    const auto z = sample_mirror_phases(quiet, rng);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    CHECK(z[2] == 0.0);

    NoiseModel m;
    m.mirror_phase_rms = 0.05;
    auto r1 = make_rng(3, 11, RngStream::mirror);
    auto r2 = make_rng(3, 11, RngStream::mirror);
    CHECK(sample_mirror_phases(m, r1) == sample_mirror_phases(m, r2));

    const std::size_t n = 20000;
    std::vector<double> combined, first;
    for (std::size_t i = 0; i < n; ++i) {
        auto rng_i = make_rng(5, i, RngStream::mirror);
        const auto p = sample_mirror_phases(m, rng_i);
        combined.push_back(p[0] - 2 * p[1] + p[2]);
        first.push_back(p[0]);
    }
    const double want = 6 * m.mirror_phase_rms * m.mirror_phase_rms;
    const auto mc = moments(combined);
    CHECK(std::abs(mc.var - want) < 3 * want * std::sqrt(2.0 / n));
    CHECK(std::abs(mc.mean) < 3 * std::sqrt(want / n));
    const auto mf = moments(first);
    const double w1 = m.mirror_phase_rms * m.mirror_phase_rms;
    CHECK(std::abs(mf.var - w1) < 3 * w1 * std::sqrt(2.0 / n));
}

TEST_CASE("detection noise")
{
    const std::vector<double> pops{0.5, 0.5};
    auto rng = make_rng(1, 0, RngStream::detection_lower);
    const auto same = apply_detection_noise(pops, NoiseModel::noiseless(), rng);
    CHECK(same == pops);

    NoiseModel m;
    const std::size_t n = 20000;
    std::vector<double> norm, raw;
    for (std::size_t i = 0; i < n; ++i) {
        auto r = make_rng(9, i, RngStream::detection_lower);
        const auto p = apply_detection_noise(pops, m, r);
        norm.push_back(p[0] / (p[0] + p[1]));
        raw.push_back(p[0]);
    }
    // p0/(p0 + p1) at p0 = p1 = 1/2: δp = (δ0 − δ1)/2.
    const double sigma_norm = 0.5 * std::sqrt(2.0) / m.detection_snr;
    const auto mn = moments(norm);
    CHECK(std::abs(std::sqrt(mn.var) - sigma_norm) < 3 * sigma_norm / std::sqrt(2.0 * n));
    const auto mr = moments(raw);
    CHECK(std::abs(std::sqrt(mr.var) - 1.0 / m.detection_snr) <
          3 / m.detection_snr / std::sqrt(2.0 * n));

    for (std::size_t i = 0; i < 1000; ++i) {
        auto r = make_rng(2, i, RngStream::detection_upper);
        const auto p = apply_detection_noise({0.0, 1.0}, m, r);
        CHECK(p[0] >= 0.0);
        CHECK(p[1] <= 1.0);
    }

    NoiseModel bad;
    bad.detection_snr = 0.0;
    CHECK_THROWS(bad.validate());
    bad = {};
    bad.mirror_phase_rms = -1.0;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("tide synthesis")
{
    TideModel flat;
    flat.mean_gravity = 9.8;
    CHECK(synthesize_tide(flat, 1234.0) == 9.8);

    TideModel one;
    one.components.push_back({2e-6, 1e-4, 0.0});
    CHECK(synthesize_tide(one, 0.0) == doctest::Approx(9.81 + 2e-6).epsilon(1e-15));
    CHECK(synthesize_tide(one, kPi / 1e-4) == doctest::Approx(9.81 - 2e-6).epsilon(1e-15));

    const auto demo = TideModel::demo();
    REQUIRE(demo.components.size() == 1);
    CHECK(demo.components[0].amplitude == 1e-6);
    CHECK(2 * kPi / demo.components[0].angular_frequency == doctest::Approx(12.42 * 3600));

    CHECK_THROWS(synthesize_tide(one, -1.0));
    TideModel neg;
    neg.components.push_back({-1.0, 1.0, 0.0});
    CHECK_THROWS(neg.validate());
}

TEST_CASE("beam tilt projection")
{
    NoiseModel m;
    CHECK(tilt_projection_drift(m, 0.0) == 1.0);
    m.tilt = 0.1 * kPi / 180;
    CHECK(tilt_projection_drift(m, 0.0) == tilt_projection_drift(m, 86400.0));
    CHECK(1 - tilt_projection_drift(m, 0.0) == doctest::Approx(1.5e-6).epsilon(0.02));

    NoiseModel half = m;
    half.tilt = 0.05 * kPi / 180;
    const double ratio = (1 - tilt_projection_drift(m, 0.0)) / (1 - tilt_projection_drift(half, 0.0));
    CHECK(ratio == doctest::Approx(4.0).epsilon(1e-6));

    NoiseModel drift;
    drift.tilt_drift = 1e-3;
    CHECK(tilt_projection_drift(drift, 7200.0) == doctest::Approx(std::cos(2e-3)).epsilon(1e-15));
    CHECK_THROWS(tilt_projection_drift(drift, -1.0));
}
