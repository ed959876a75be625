#include "bragg/core_physics.hpp"

#include <cmath>
#include <stdexcept>

#include "bragg/constants.hpp"

namespace bragg {

using constants::hbar;
using constants::pi;

AtomSpecies::AtomSpecies(double mass_kg, double wavelength_m)
    : mass_(mass_kg), wavelength_(wavelength_m)
{
    if (!(mass_kg > 0.0)) throw std::invalid_argument("species mass must be positive");
    if (!(wavelength_m > 0.0)) throw std::invalid_argument("species wavelength must be positive");
}

AtomSpecies AtomSpecies::rubidium87()
{
    return {constants::rb87_mass, constants::rb87_d2_wavelength};
}

double AtomSpecies::wavevector() const noexcept { return 2.0 * pi / wavelength_; }

double AtomSpecies::recoil_frequency() const noexcept
{
    const double k = wavevector();
    return hbar * k * k / (2.0 * mass_);
}

double AtomSpecies::recoil_velocity() const noexcept { return hbar * wavevector() / mass_; }

BeamGeometry::BeamGeometry(const AtomSpecies& species, double tilt_rad)
    : k_eff_(2.0 * species.wavevector()), tilt_(tilt_rad)
{
    if (!(tilt_rad >= 0.0 && tilt_rad < pi / 2.0))
        throw std::invalid_argument("beam tilt must lie in [0, pi/2)");
}

double recoil_frequency(const AtomSpecies& species) noexcept
{
    return species.recoil_frequency();
}

double mzi_phase(const InterferometerParams& p, const BeamGeometry& geom)
{
    if (p.order < 1) throw std::invalid_argument("Bragg order must be >= 1");
    if (!(p.interrogation_time > 0.0))
        throw std::invalid_argument("interrogation time must be positive");
    const double t2 = p.interrogation_time * p.interrogation_time;
    const double accel_term =
        geom.k_eff() * p.gravity * std::cos(geom.tilt()) - 2.0 * pi * p.sweep_rate;
    return p.order * (accel_term * t2 + p.laser_phase());
}

double resonant_sweep_rate(double gravity, const BeamGeometry& geom)
{
    if (!(gravity >= 0.0)) throw std::invalid_argument("gravity must be non-negative");
    return geom.k_eff() * gravity * std::cos(geom.tilt()) / (2.0 * pi);
}

double gravity_from_sweep(double sweep_rate, const BeamGeometry& geom)
{
    if (!(sweep_rate >= 0.0)) throw std::invalid_argument("sweep rate must be non-negative");
    const double projection = std::cos(geom.tilt());
    if (projection <= 0.0) throw std::invalid_argument("degenerate beam projection");
    return 2.0 * pi * sweep_rate / (geom.k_eff() * projection);
}

double bragg_resonance(int order, const AtomSpecies& species)
{
    if (order < 1) throw std::invalid_argument("Bragg order must be >= 1");
    return 4.0 * order * species.recoil_frequency();
}

double transition_frequency(const AtomSpecies& species, int from_site, int order,
                            double q_hbar_k)
{
    if (order == 0) throw std::invalid_argument("transition order must be non-zero");
    // (E_{s+n} - E_s) / (n ħ) with E_m = 4ħω_r (m + q/2ħk)^2.
    const double s = from_site + 0.5 * q_hbar_k;
    return 4.0 * species.recoil_frequency() * (2.0 * s + order);
}

double coherence_length(const AtomSpecies& species, double temperature)
{
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    return hbar * std::sqrt(2.0 * pi) /
           std::sqrt(species.mass() * constants::boltzmann * temperature);
}

double path_length_increment(const AtomSpecies& species, double interrogation_time)
{
    if (!(interrogation_time >= 0.0))
        throw std::invalid_argument("interrogation time must be non-negative");
    return 2.0 * species.recoil_velocity() * interrogation_time;
}

double revival_period(const AtomSpecies& species)
{
    const double k = species.wavevector();
    return pi * species.mass() / (2.0 * hbar * k * k);
}

double path_phase(int j, int a, double interrogation_time, const AtomSpecies& species)
{
    if (!(interrogation_time >= 0.0))
        throw std::invalid_argument("interrogation time must be non-negative");
    const double k = species.wavevector();
    const double jd = j;
    const double ad = a;
    return 4.0 * hbar * k * k * interrogation_time / species.mass() *
           (0.5 * jd * jd + ad * ad - ad * jd);
}

double propagation_phase(double k1, double z1, double k2, double z2,
                         double interrogation_time, const AtomSpecies& species)
{
    const double w1 = hbar * k1 * k1 / (2.0 * species.mass());
    const double w2 = hbar * k2 * k2 / (2.0 * species.mass());
    return k1 * z1 + k2 * z2 - (w1 + w2) * interrogation_time;
}

}  // namespace bragg
