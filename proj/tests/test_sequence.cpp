#include <cmath>

#include <doctest.h>

#include "bragg/errors.hpp"
#include "bragg/sequence.hpp"

using namespace bragg;

namespace {

constexpr double kPi = 3.14159265358979323846;

const AtomSpecies& rb()
{
    static const AtomSpecies s = AtomSpecies::rubidium87();
    return s;
}

const MZISequence& quasi_bragg()
{
    static const MZISequence s = MZISequence::calibrated(rb(), 2, 2e-3, 15e-6);
    return s;
}

EnsembleSpec small_ensemble(int n = 12)
{
    EnsembleSpec e;
    e.sample_count = n;
    return e;
}

}  // namespace

TEST_CASE("ensemble draws")
{
    EnsembleSpec e;
    e.sample_count = 5000;
    const auto q = e.draw();
    REQUIRE(q.size() == 5000);
    double m2 = 0;
    for (double v : q) {
        CHECK(std::abs(v) <= 1.0);
        m2 += v * v;
    }
    // truncated at ±1/σ ≈ 2.38σ: variance factor 1 − 2aφ(a)/(2Φ(a) − 1)
    const double a = 1.0 / e.sigma_q;
    const double phi = std::exp(-0.5 * a * a) / std::sqrt(2 * kPi);
    const double mass = std::erf(a / std::sqrt(2.0));
    const double want = e.sigma_q * e.sigma_q * (1 - 2 * a * phi / mass);
    CHECK(m2 / 5000 == doctest::Approx(want).epsilon(0.06));
    CHECK(e.draw() == q);

    EnsembleSpec flat;
    flat.sigma_q = 0.0;
    CHECK(flat.draw() == std::vector<double>{0.0});
    EnsembleSpec listed;
    listed.explicit_q = {0.1, -0.2};
    CHECK(listed.draw() == listed.explicit_q);
    listed.explicit_q = {1.5};
    CHECK_THROWS(listed.draw());
}

TEST_CASE("sequence validation")
{
    MZISequence s;
    CHECK_THROWS_AS(s.validate(), CalibrationError);
    MZISequence t = quasi_bragg();
    CHECK_NOTHROW(t.validate());
    CHECK(t.output_site() == 2);
    t.interrogation_time = 50e-6;
    CHECK_THROWS(t.validate());
    t = quasi_bragg();
    t.mirror.frequency_difference *= 1.01;
    CHECK_THROWS(t.validate());
}

TEST_CASE("residual chirp")
{
    MZISequence s = quasi_bragg();
    CHECK(residual_chirp(rb(), s, 9.81, 1.0) == 0.0);
    const double a0 = resonant_sweep_rate(9.81, BeamGeometry(rb()));
    s.sweep_rate = a0 - 3.0;
    CHECK(residual_chirp(rb(), s, 9.81, 1.0) == doctest::Approx(3.0).epsilon(1e-6));
}

TEST_CASE("shots conserve population and are reproducible")
{
    const auto seq = quasi_bragg();
    NoiseModel noise;
    noise.mirror_phase_rms = 0.1;
    const ShotContext ctx{17, 3, 0.0};
    const auto a = run_shot(small_ensemble(), seq, 9.81, noise, ctx);
    const auto b = run_shot(small_ensemble(), seq, 9.81, noise, ctx);
    CHECK(a.normalized == b.normalized);
    CHECK(a.mirror_phases == b.mirror_phases);
    CHECK(a.populations == b.populations);
    CHECK(a.normalized != run_shot(small_ensemble(), seq, 9.81, noise, {17, 4, 0.0}).normalized);

    const auto clean = run_shot(small_ensemble(), seq, 9.81, NoiseModel::noiseless(), ctx);
    double total = 0;
    for (const auto& [site, p] : clean.populations) {
        CHECK(p >= 0.0);
        total += p;
    }
    CHECK(total <= 1.0 + 1e-9);
    CHECK(total >= 1.0 - 1e-4);
    const double p_in = clean.populations.at(0), p_out = clean.populations.at(2);
    CHECK(clean.normalized == doctest::Approx(p_in / (p_in + p_out)));
    CHECK(clean.normalized == clean.ideal_normalized);
    CHECK(clean.detection_noise == std::array<double, 2>{0.0, 0.0});
}

TEST_CASE("common phase on all three pulses changes nothing")
{
    const ShotEngine engine(rb(), small_ensemble().draw(), quasi_bragg(), 0.0);
    const auto ref = engine.populations({0.0, 0.0, 0.4});
    for (double d : {0.3, -1.7, 2.9}) {
        const auto moved = engine.populations({d, d, 0.4 + d});
        for (const auto& [site, p] : ref) CHECK(moved.at(site) == doctest::Approx(p).epsilon(1e-10));
    }
    const auto other = engine.populations({0.0, 0.1, 0.4});
    CHECK(std::abs(other.at(0) - ref.at(0)) > 1e-4);
}

TEST_CASE("scans")
{
    const auto seq = quasi_bragg();
    NoiseModel noise;
    noise.mirror_phase_rms = 0.05;
    ScanOptions opt;
    opt.master_seed = 5;

    SUBCASE("a one-point grid is a single shot")
    {
        const auto scan = scan_fringe(small_ensemble(), seq, 9.81, noise, {0.7}, opt);
        MZISequence shifted = seq;
        shifted.final_phase = 0.7;
        const auto shot = run_shot(small_ensemble(), shifted, 9.81, noise, {5, 0, 0.0});
        CHECK(scan.normalized[0] == shot.normalized);
        CHECK(scan.ports.at(2)[0] == shot.populations.at(2));
    }
    SUBCASE("worker count does not change results")
    {
        const auto grid = uniform_phase_grid(16);
        const auto one = scan_fringe(small_ensemble(), seq, 9.81, noise, grid, opt);
        ScanOptions par = opt;
        par.threads = 4;
        const auto four = scan_fringe(small_ensemble(), seq, 9.81, noise, grid, par);
        CHECK(one.normalized == four.normalized);
        CHECK(one.ports == four.ports);
        CHECK_NOTHROW(one.validate());
        CHECK(one.meta.order == 2);
        CHECK(one.meta.seed == 5);
    }
    SUBCASE("noiseless peak-to-peak matches the fitted contrast")
    {
        const auto grid = uniform_phase_grid(48);
        const auto s = scan_fringe(small_ensemble(), seq, 9.81, NoiseModel::noiseless(), grid, opt);
        const auto fit = fit_harmonics(s, 4);
        const auto [lo, hi] = std::minmax_element(s.normalized.begin(), s.normalized.end());
        CHECK((*hi - *lo) / (*hi + *lo) == doctest::Approx(fringe_contrast(fit).value).epsilon(0.02));
        CHECK(fit.residual_rms < 0.01);
    }
    SUBCASE("sweep-rate scans use the equivalent phase axis")
    {
        const double a0 = resonant_sweep_rate(9.81, BeamGeometry(rb()));
        std::vector<double> rates;
        for (int i = 0; i < 6; ++i) rates.push_back(a0 + 10.0 * i);
        const auto s = scan_sweep_rate(small_ensemble(), seq, 9.81, NoiseModel::noiseless(), rates, opt);
        REQUIRE(s.size() == 6);
        const double t2 = seq.interrogation_time * seq.interrogation_time;
        for (std::size_t i = 0; i < 6; ++i) {
            CHECK(s.phase[i] == doctest::Approx(2 * kPi * (a0 - s.control[i]) * t2).epsilon(1e-6).scale(1));
            if (i) CHECK(s.phase[i] > s.phase[i - 1]);
        }
        CHECK(s.meta.control == "sweep_rate");
    }
    CHECK_THROWS(scan_fringe(small_ensemble(), seq, 9.81, noise, {}, opt));
    CHECK_THROWS(scan_fringe(small_ensemble(), seq, 9.81, noise, {0.2, 0.1}, opt));
}

TEST_CASE("deep Bragg interferometer closes on a fringe extremum")
{
    const auto seq = MZISequence::calibrated(rb(), 1, 1e-3, 40e-6);
    EnsembleSpec plane;
    plane.sigma_q = 0.0;
    const ShotEngine engine(rb(), plane.draw(), seq, 0.0);
    auto norm = [&](double phi) {
        const auto p = engine.populations({0.0, 0.0, phi});
        return p.at(0) / (p.at(0) + p.at(1));
    };
    const double centre = norm(0.0);
    CHECK(std::min(centre, 1 - centre) < 0.02);
    CHECK((norm(0.1) - centre) * (norm(-0.1) - centre) > 0.0);
}

TEST_CASE("contrast against interrogation time")
{
    EnsembleSpec plane;
    plane.sigma_q = 0.0;
    std::vector<double> ts;
    for (int i = 0; i <= 20; ++i) ts.push_back(2e-3 + 2e-6 * i);
    MZISequence seq = quasi_bragg();
    seq.coherence = Coherence::plane_wave;
    const auto pts = scan_contrast_vs_t(plane, seq, ts, 9.81, NoiseModel::noiseless(),
                                        uniform_phase_grid(24, 2.0));
    REQUIRE(pts.size() == ts.size());
    double lo = 1, hi = 0;
    for (const auto& p : pts) {
        lo = std::min(lo, p.contrast);
        hi = std::max(hi, p.contrast);
    }
    CHECK((hi - lo) / hi < 0.02);

    std::vector<double> coarse{2e-3, 2e-3 + 5e-6};
    CHECK_THROWS(scan_contrast_vs_t(plane, seq, coarse, 9.81, NoiseModel::noiseless(),
                                    uniform_phase_grid(24, 2.0)));
}

TEST_CASE("gradiometer")
{
    GradiometerSpec g;
    g.timing = MZISequence::calibrated(rb(), 3, 2e-3, 15e-6);
    CHECK_NOTHROW(g.validate(rb()));
    CHECK(g.upper_site() == 4);
    CHECK(g.lower_site() == 1);
    CHECK(g.baseline(rb()) == doctest::Approx(8 * rb().recoil_velocity() * 0.05));
    CHECK(g.lower_sequence(rb()).output_site() == 4);
    CHECK(g.upper_sequence(rb()).output_site() == 1);

    GradiometerSpec clash = g;
    clash.lower_momentum = 4.0;
    CHECK_THROWS_AS(clash.validate(rb()), ConfigError);
    GradiometerSpec odd = g;
    odd.lower_momentum = 3.0;
    CHECK_THROWS_AS(odd.validate(rb()), ConfigError);

    const auto grid = uniform_phase_grid(24);
    const auto scans = run_gradiometer(g, small_ensemble(6), 9.81, 0.0, NoiseModel::noiseless(), grid);
    const auto fl = fit_harmonics(scans.lower, 3);
    const auto fu = fit_harmonics(scans.upper, 3);
    const int m = fl.dominant_harmonic();
    CHECK(fu.dominant_harmonic() == m);
    const double d = std::remainder(fl.phase[m - 1] - fu.phase[m - 1], 2 * kPi);
    CHECK(std::abs(d) < 1e-4);

    NoiseModel vib;
    vib.mirror_phase_rms = 0.2;
    const auto shots = run_gradiometer_shots(g, small_ensemble(6), 9.81, 0.0, vib, 0.5, 4);
    for (std::size_t i = 0; i < 4; ++i)
        CHECK(shots.lower[i].mirror_phases == shots.upper[i].mirror_phases);
    CHECK(shots.lower[0].detection_noise != shots.upper[0].detection_noise);
}

TEST_CASE("class path weights")
{
    const auto seq = MZISequence::calibrated(rb(), 2, 1e-3, 8e-6);
    const auto w = class_path_weights(rb(), seq, 2, -7, 9, 0);
    REQUIRE(w.size() == 17);
    // a = 0 → b = 2 is the textbook arm, a = 2 → b = 0 the other one
    double big = 0;
    for (const auto& v : w) big = std::max(big, std::abs(v));
    CHECK(std::abs(w[7]) > 0.3 * big);
    CHECK(std::abs(w[9]) > 0.3 * big);
    CHECK(w.front() == std::complex<double>(0.0, 0.0));
    CHECK(w.back() == std::complex<double>(0.0, 0.0));
}
