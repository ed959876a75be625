#pragma once

#include <vector>

#include "bragg/ladder.hpp"

namespace bragg {

/// Bloch velocity selection: lattice loaded at rest in the falling frame,
/// swept to `target_momentum`, then switched off.
///
/// Depth ramps are linear; the lattice frequency sweep is linear in time,
/// so the acceleration is fixed by target momentum and sweep duration.
struct LatticeRamp {
    double depth = 8.0;                // units of E_r = ħω_r
    double load_duration = 100e-6;     // s, also used for the ramp-down
    double sweep_duration = 400e-6;    // s
    int target_momentum = 8;           // units of ħk, even

    /// a = target·ħk / (m · sweep_duration).
    double acceleration(const AtomSpecies& species) const;
    /// Two-photon Rabi frequency of the lattice at full depth, rad/s.
    double peak_rabi(const AtomSpecies& species) const;
    double total_duration() const { return 2.0 * load_duration + sweep_duration; }
    void validate() const;
};

/// Runs load, sweep and unload on `state` and returns it relabelled so that
/// site 0 is the target momentum, with time advanced by the ramp duration.
MomentumLadderState bloch_accelerate(const MomentumLadderState& state, const LatticeRamp& ramp,
                                     const EvolutionConfig& cfg = {});

/// Population within ±1ħk of the target after acceleration.
double selected_fraction(const MomentumLadderState& accelerated);

struct SelectionProfile {
    std::vector<double> q_hbar_k;
    std::vector<double> transfer;

    /// Full width at half maximum in ħk, linearly interpolated.
    double fwhm() const;
};

/// Transfer efficiency into the target window for plane waves of initial
/// momentum q (units ħk, |q| <= 2). Grid points are independent and may be
/// evaluated on up to `threads` workers; results keep grid order.
SelectionProfile selection_profile(const AtomSpecies& species, const LatticeRamp& ramp,
                                   const std::vector<double>& q_grid,
                                   const EvolutionConfig& cfg = {}, int threads = 1);

}  // namespace bragg
