#include <cmath>

#include <doctest.h>

#include "bragg/bvs.hpp"

using namespace bragg;

namespace {

const AtomSpecies& rb()
{
    static const AtomSpecies s = AtomSpecies::rubidium87();
    return s;
}

double transfer(double p, const LatticeRamp& ramp = {})
{
    return selected_fraction(bloch_accelerate(MomentumLadderState::from_momentum(rb(), p, 6), ramp));
}

}  // namespace

TEST_CASE("ramp parameters")
{
    LatticeRamp r;
    CHECK(r.total_duration() == doctest::Approx(600e-6));
    CHECK(r.acceleration(rb()) == doctest::Approx(8 * rb().recoil_velocity() / 400e-6));
    CHECK(r.peak_rabi(rb()) == doctest::Approx(4.0 * recoil_frequency(rb())));
    r.target_momentum = 7;
    CHECK_THROWS(r.validate());
    r.target_momentum = 8;
    r.sweep_duration = 0.0;
    CHECK_THROWS(r.validate());
}

TEST_CASE("no lattice, no acceleration")
{
    LatticeRamp r;
    r.depth = 0.0;
    auto in = MomentumLadderState::plane_wave(rb(), 0, 0.3, 6);
    in.set_amplitude(1, 0.6);
    in.set_amplitude(0, 0.8);
    const auto out = bloch_accelerate(in, r);
    const int shift = r.target_momentum / 2;
    for (int n = in.n_min(); n <= in.n_max(); ++n)
        CHECK(out.population(n - shift) == doctest::Approx(in.population(n)).epsilon(1e-12));
    CHECK(out.mean_momentum() + r.target_momentum == doctest::Approx(in.mean_momentum()));
    CHECK(out.time() == doctest::Approx(r.total_duration()));
}

TEST_CASE("first-band atoms are transported")
{
    const auto in = MomentumLadderState::from_momentum(rb(), 0.0, 6);
    const auto out = bloch_accelerate(in, LatticeRamp{});
    CHECK(selected_fraction(out) >= 0.95);
    CHECK(std::abs(out.norm() - 1.0) < 1e-9);
    const double gain = out.mean_momentum() + 8.0 - in.mean_momentum();
    CHECK(gain == doctest::Approx(8.0).epsilon(0.02));

    LatticeRamp slow;
    slow.sweep_duration *= 2.0;
    const double slower = transfer(0.0, slow);
    CHECK(slower >= 0.95);
    CHECK(std::abs(slower - selected_fraction(out)) < 0.01);
}

TEST_CASE("atoms outside the first band stay behind")
{
    for (double p : {-1.9, -1.5, 1.5, 1.9}) CHECK(transfer(p) < 0.1);
}

TEST_CASE("slow loading is adiabatic")
{
    LatticeRamp a;
    a.load_duration = 800e-6;
    LatticeRamp b = a;
    b.load_duration = 1600e-6;
    CHECK(std::abs(transfer(0.0, a) - transfer(0.0, b)) < 1e-3);
}

TEST_CASE("selection profile")
{
    const std::vector<double> grid{-1.0, -0.5, 0.0, 0.5, 1.0};
    const auto prof = selection_profile(rb(), LatticeRamp{}, grid, {}, 2);
    CHECK(prof.transfer[0] < prof.transfer[2]);
    CHECK(prof.transfer[4] < prof.transfer[2]);
    CHECK(std::abs(prof.transfer[1] - prof.transfer[3]) < 1e-3);
    CHECK(prof.transfer[2] == doctest::Approx(transfer(0.0)).epsilon(1e-12));
    CHECK_THROWS(selection_profile(rb(), LatticeRamp{}, {2.5}));
}

TEST_CASE("profile width by interpolation")
{
    SelectionProfile p;
    p.q_hbar_k = {-2, -1, 0, 1, 2};
    p.transfer = {0.0, 0.5, 1.0, 0.5, 0.0};
    CHECK(p.fwhm() == doctest::Approx(2.0));
    p.transfer = {0.0, 0.2, 1.0, 0.6, 0.0};
    CHECK(p.fwhm() == doctest::Approx(0.625 + 7.0 / 6.0));
}
