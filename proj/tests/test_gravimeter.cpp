#include <cmath>

#include <doctest.h>

#include "bragg/errors.hpp"
#include "bragg/gravimeter.hpp"

using namespace bragg;

namespace {

constexpr double kPi = 3.14159265358979323846;

MZISequence timing(double T = 0.06)
{
    MZISequence s;
    s.interrogation_time = T;
    return s;
}

}  // namespace

TEST_CASE("fringe response")
{
    const auto r = FringeResponse::sinusoid(0.8);
    CHECK(r.bias == doctest::Approx(kPi / 2).epsilon(1e-3));
    CHECK(r.slope() == doctest::Approx(-0.4).epsilon(1e-6));
    CHECK(r.branch_lo == doctest::Approx(0.0).epsilon(2e-3).scale(1));
    CHECK(r.branch_hi == doctest::Approx(kPi).epsilon(2e-3));
    for (double dx : {-1.2, -0.01, 0.0, 0.5, 1.4})
        CHECK(r.phase_offset(r.fit.evaluate(r.bias + dx)) == doctest::Approx(dx).epsilon(1e-9).scale(1));

    HarmonicFit two;
    two.offset = 0.5;
    two.amplitude = {0.1, 0.3};
    two.phase = {0.0, 0.4};
    const auto b = FringeResponse::from_fit(two);
    CHECK(b.branch_hi - b.branch_lo < kPi);
    CHECK(std::abs(b.slope()) > 0.6);
    CHECK_THROWS(FringeResponse::sinusoid(0.0));
}

TEST_CASE("response moved to another operating point")
{
    HarmonicFit f;
    f.offset = 0.5;
    f.amplitude = {0.0, 0.0, 0.4};
    f.phase = {0.0, 0.0, 0.0};
    const auto r = FringeResponse::from_fit(f);
    // One third of a period away the slope has the opposite sign.
    const auto moved = r.at(r.bias + kPi / 3.0);
    CHECK(moved.slope() == doctest::Approx(-r.slope()));
    CHECK(moved.branch_lo < moved.bias);
    CHECK(moved.branch_hi > moved.bias);
    CHECK(moved.branch_hi - moved.branch_lo == doctest::Approx(kPi / 3.0).epsilon(0.01));
    for (double d : {-0.2, -0.05, 0.1, 0.25})
        CHECK(moved.phase_offset(f.evaluate(moved.bias + d)) == doctest::Approx(d).epsilon(1e-6));
    CHECK_THROWS_AS(r.at(0.0), NumericalError);
}

TEST_CASE("noiseless run reads back the tide exactly")
{
    GravityRunSpec spec;
    spec.shots = 400;
    spec.shot_period = 300.0;
    spec.sensitivity = 0.0;
    spec.bin_size = 10;
    const auto tide = TideModel::demo();
    const auto run = run_gravity_series(spec, FringeResponse::sinusoid(0.9), timing(), tide,
                                        NoiseModel::noiseless(), 1);
    for (std::size_t i = 0; i < run.time.size(); ++i) {
        CHECK(run.true_gravity[i] == synthesize_tide(tide, run.time[i]));
        CHECK(run.measured_gravity[i] == doctest::Approx(run.true_gravity[i]).epsilon(1e-13));
    }
    CHECK(run.tide_fit.amplitude[0] == doctest::Approx(1e-6).epsilon(1e-6));
    CHECK(run.binned_tide_fit.amplitude[0] == doctest::Approx(1e-6).epsilon(2e-3));
    CHECK(run.bins.size() == 40);
    CHECK(run.bin_time[1] == doctest::Approx(300.0 * 10 + 300.0 * 4.5));
    CHECK(run.mirror_phase_rms == 0.0);
    CHECK(run.detection_phase_noise == 0.0);
}

TEST_CASE("beam tilt projects gravity")
{
    GravityRunSpec spec;
    spec.shots = 50;
    spec.sensitivity = 0.0;
    spec.bin_size = 5;
    NoiseModel tilted = NoiseModel::noiseless();
    tilted.tilt = 0.1 * kPi / 180;
    TideModel flat;
    const auto run = run_gravity_series(spec, FringeResponse::sinusoid(), timing(), flat, tilted, 2);
    CHECK(run.measured_gravity[7] == doctest::Approx(9.81 * std::cos(tilted.tilt)).epsilon(1e-13));
    CHECK(1 - run.measured_gravity[7] / 9.81 == doctest::Approx(1.5e-6).epsilon(0.02));

    NoiseModel drifting = NoiseModel::noiseless();
    drifting.tilt_drift = 1e-3;
    spec.shot_period = 360.0;
    const auto d = run_gravity_series(spec, FringeResponse::sinusoid(), timing(), flat, drifting, 2);
    CHECK(d.measured_gravity.back() < d.measured_gravity.front());
}

TEST_CASE("noise budget")
{
    GravityRunSpec spec;
    spec.shots = 4000;
    NoiseModel noise;
    noise.detection_snr = 200.0;
    const auto r = FringeResponse::sinusoid(0.8);
    const auto run = run_gravity_series(spec, r, timing(), TideModel::demo(), noise, 3);
    const double k_eff = 4 * kPi / 780.24e-9;
    const double total = 6e-8 * 9.81 * k_eff * 0.0036;
    const double det = std::sqrt(0.5) / 200.0 / 0.4;
    CHECK(run.detection_phase_noise == doctest::Approx(det).epsilon(1e-3));
    CHECK(run.mirror_phase_rms == doctest::Approx(std::sqrt(total * total - det * det) / std::sqrt(6.0)).epsilon(1e-3));
    double var = 0;
    for (double v : run.residual) var += v * v;
    const double sd = std::sqrt(var / run.residual.size());
    CHECK(sd == doctest::Approx(6e-8).epsilon(0.05));

    const auto again = run_gravity_series(spec, r, timing(), TideModel::demo(), noise, 3);
    CHECK(again.measured_gravity == run.measured_gravity);

    NoiseModel loud;
    loud.detection_snr = 10.0;
    CHECK_THROWS_AS(run_gravity_series(spec, r, timing(), TideModel::demo(), loud, 3), ConfigError);
    GravityRunSpec bad;
    bad.shots = 1;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("white gravity series")
{
    const auto y = white_gravity_series(6e-8, 4.0, 20000, 9);
    double m = 0, v = 0;
    for (double x : y) m += x;
    m /= y.size();
    for (double x : y) v += (x - m) * (x - m);
    v /= y.size() - 1;
    CHECK(std::sqrt(v) == doctest::Approx(3e-8).epsilon(3.0 / std::sqrt(2 * 20000.0)));
    CHECK(white_gravity_series(6e-8, 4.0, 20000, 9) == y);
}
