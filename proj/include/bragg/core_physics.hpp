#pragma once

#include <array>

namespace bragg {

/// Atom mass and Bragg-light wavelength. Every derived quantity (wavevector,
/// recoil frequency) is computed on demand from these two numbers.
class AtomSpecies {
public:
    AtomSpecies(double mass_kg, double wavelength_m);

    /// 87Rb driven near the D2 line at 780.24 nm.
    static AtomSpecies rubidium87();

    double mass() const noexcept { return mass_; }
    double wavelength() const noexcept { return wavelength_; }
    /// Single-photon wavevector k = 2π/λ.
    double wavevector() const noexcept;
    /// ω_r = ħk²/2m in rad/s.
    double recoil_frequency() const noexcept;
    /// ħk/m in m/s.
    double recoil_velocity() const noexcept;

    friend bool operator==(const AtomSpecies&, const AtomSpecies&) = default;

private:
    double mass_;
    double wavelength_;
};

/// Counter-propagating beam pair: k_eff = 2k, tilted from vertical.
class BeamGeometry {
public:
    explicit BeamGeometry(const AtomSpecies& species, double tilt_rad = 0.0);

    double k_eff() const noexcept { return k_eff_; }
    double tilt() const noexcept { return tilt_; }

private:
    double k_eff_;
    double tilt_;
};

struct InterferometerParams {
    int order = 1;
    double interrogation_time = 0.0;  // s
    double sweep_rate = 0.0;          // Hz/s
    std::array<double, 3> pulse_phases{0.0, 0.0, 0.0};
    double gravity = 0.0;  // m/s^2

    /// φ_L = φ1 − 2φ2 + φ3.
    double laser_phase() const noexcept
    {
        return pulse_phases[0] - 2.0 * pulse_phases[1] + pulse_phases[2];
    }
};

double recoil_frequency(const AtomSpecies& species) noexcept;

/// Mach-Zehnder phase Φ = n[(k_eff g cosθ − 2πα)T² + φ_L].
double mzi_phase(const InterferometerParams& p, const BeamGeometry& geom);

/// Chirp α0 = k_eff g cosθ / 2π that cancels gravity for every T.
double resonant_sweep_rate(double gravity, const BeamGeometry& geom);

/// Inverse of resonant_sweep_rate. Throws for a horizontal beam.
double gravity_from_sweep(double sweep_rate, const BeamGeometry& geom);

/// Beam frequency difference 4nω_r coupling |0ħk> and |2nħk>.
double bragg_resonance(int order, const AtomSpecies& species);

/// Frequency difference resonant for the ladder transition
/// |2sħk + q> -> |2(s+order)ħk + q>; `order` may be negative.
double transition_frequency(const AtomSpecies& species, int from_site, int order,
                            double q_hbar_k = 0.0);

/// Thermal de Broglie coherence length ħ√(2π)/√(m k_B T).
double coherence_length(const AtomSpecies& species, double temperature);

/// Path-length quantum l = 2ħkT/m.
double path_length_increment(const AtomSpecies& species, double interrogation_time);

/// Revival period δT = πm/(2ħk²) = π/(4ω_r).
double revival_period(const AtomSpecies& species);

/// Phase of trajectory `a` in interferometer class `j`:
/// (4ħk²T/m)(j²/2 + a² − aj).
double path_phase(int j, int a, double interrogation_time, const AtomSpecies& species);

/// Two-segment propagation phase k1 z1 + k2 z2 − (ω1 + ω2)T with ω = ħk²/2m.
double propagation_phase(double k1, double z1, double k2, double z2,
                         double interrogation_time, const AtomSpecies& species);

}  // namespace bragg
