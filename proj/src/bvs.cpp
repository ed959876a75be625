#include "bragg/bvs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bragg/constants.hpp"
#include "bragg/parallel.hpp"

namespace bragg {

double LatticeRamp::acceleration(const AtomSpecies& species) const
{
    return target_momentum * species.recoil_velocity() / sweep_duration;
}

double LatticeRamp::peak_rabi(const AtomSpecies& species) const
{
    return 0.5 * depth * species.recoil_frequency();
}

void LatticeRamp::validate() const
{
    if (!(depth >= 0.0)) throw std::invalid_argument("lattice depth must be non-negative");
    if (!(load_duration > 0.0)) throw std::invalid_argument("lattice load duration must be positive");
    if (!(sweep_duration > 0.0)) throw std::invalid_argument("lattice sweep duration must be positive");
    if (target_momentum < 2 || target_momentum % 2 != 0)
        throw std::invalid_argument("target momentum must be a positive even multiple of hbar k");
}

MomentumLadderState bloch_accelerate(const MomentumLadderState& state, const LatticeRamp& ramp,
                                     const EvolutionConfig& cfg)
{
    ramp.validate();
    const AtomSpecies& sp = state.species();
    const int shift = ramp.target_momentum / 2;
    const double t0 = state.time();
    const double t1 = t0 + ramp.load_duration;
    const double t2 = t1 + ramp.sweep_duration;
    const double t3 = t2 + ramp.load_duration;
    const double rabi = ramp.peak_rabi(sp);
    const double rate_end = 4.0 * ramp.target_momentum * sp.recoil_frequency();
    const double sweep = ramp.sweep_duration;
    const double load = ramp.load_duration;

    LatticeDrive drive;
    drive.rabi = [=](double t) {
        if (t <= t0 || t >= t3) return 0.0;
        if (t < t1) return rabi * (t - t0) / load;
        if (t <= t2) return rabi;
        return rabi * (t3 - t) / load;
    };
    drive.phase_rate = [=](double t) {
        if (t <= t1) return 0.0;
        if (t <= t2) return rate_end * (t - t1) / sweep;
        return rate_end;
    };
    drive.phase = [=](double t) {
        if (t <= t1) return 0.0;
        if (t <= t2) return 0.5 * rate_end * (t - t1) * (t - t1) / sweep;
        return 0.5 * rate_end * sweep + rate_end * (t - t2);
    };
    drive.t_start = t0;
    drive.t_end = t3;
    drive.breakpoints = {t1, t2};
    drive.time_scale = std::min(load, sweep) / 8.0;

    const int lo = state.n_min() - 2;
    const int hi = state.n_max() + shift + 2;
    MomentumLadderState wide(sp, lo, hi, state.q_hbar_k(), t0);
    wide.amplitudes().segment(state.n_min() - lo, state.size()) = state.amplitudes();

    const LadderPropagator prop = propagate_drive(sp, lo, hi, state.q_hbar_k(), drive, cfg);
    prop.apply(wide.amplitudes());
    wide.set_time(t3);
    check_truncation(wide, cfg.leakage_limit);
    return wide.reindexed(shift);
}

double selected_fraction(const MomentumLadderState& accelerated)
{
    double sum = 0.0;
    for (int n = accelerated.n_min(); n <= accelerated.n_max(); ++n) {
        const double p = 2.0 * n + accelerated.q_hbar_k();
        if (std::abs(p) <= 1.0 + 1e-12) sum += accelerated.population(n);
    }
    return sum;
}

double SelectionProfile::fwhm() const
{
    if (q_hbar_k.size() < 3) throw std::invalid_argument("profile needs at least 3 points");
    const auto peak_it = std::max_element(transfer.begin(), transfer.end());
    const double half = 0.5 * *peak_it;
    const std::size_t peak = static_cast<std::size_t>(peak_it - transfer.begin());
    auto crossing = [&](std::size_t a, std::size_t b) {
        const double f = (half - transfer[a]) / (transfer[b] - transfer[a]);
        return q_hbar_k[a] + f * (q_hbar_k[b] - q_hbar_k[a]);
    };
    std::size_t i = peak;
    while (i > 0 && transfer[i - 1] >= half) --i;
    if (i == 0) throw std::runtime_error("profile does not fall below half maximum on the left");
    const double left = crossing(i - 1, i);
    std::size_t j = peak;
    while (j + 1 < transfer.size() && transfer[j + 1] >= half) ++j;
    if (j + 1 == transfer.size())
        throw std::runtime_error("profile does not fall below half maximum on the right");
    const double right = crossing(j + 1, j);
    return right - left;
}

SelectionProfile selection_profile(const AtomSpecies& species, const LatticeRamp& ramp,
                                   const std::vector<double>& q_grid, const EvolutionConfig& cfg,
                                   int threads)
{
    for (double q : q_grid)
        if (!(std::abs(q) <= 2.0)) throw std::invalid_argument("profile momenta must satisfy |q| <= 2 hbar k");
    SelectionProfile prof;
    prof.q_hbar_k = q_grid;
    prof.transfer.assign(q_grid.size(), 0.0);
    parallel_for(q_grid.size(), threads, [&](std::size_t i) {
        const MomentumLadderState in =
            MomentumLadderState::from_momentum(species, q_grid[i], cfg.ladder_guard_sites);
        prof.transfer[i] = selected_fraction(bloch_accelerate(in, ramp, cfg));
    });
    return prof;
}

}  // namespace bragg
