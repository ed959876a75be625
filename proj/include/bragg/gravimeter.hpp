#pragma once

#include <cstdint>
#include <vector>

#include "bragg/analysis.hpp"
#include "bragg/environment.hpp"
#include "bragg/sequence.hpp"

namespace bragg {

/// Normalized population as a function of the φ_L-equivalent phase, with
/// the mid-fringe bias and the monotonic branch around it.
struct FringeResponse {
    HarmonicFit fit;
    double port_total = 1.0;  // p_in + p_out at the bias
    double bias = 0.0;        // steepest point, rad
    double branch_lo = 0.0;
    double branch_hi = 0.0;

    /// Biased at the steepest point of `fit`.
    static FringeResponse from_fit(const HarmonicFit& fit, double port_total = 1.0);
    /// Fit of a (noiseless) scan's normalized population.
    static FringeResponse from_scan(const FringeScan& scan, int harmonics = 3);
    /// 0.5 + 0.5·contrast·cos(x).
    static FringeResponse sinusoid(double contrast = 1.0);
    /// Same fringe operated at `operating_point`, with the branch around it.
    FringeResponse at(double operating_point) const;

    double slope() const noexcept { return fit.derivative(bias); }
    /// Phase offset from the bias that reproduces `normalized`.
    double phase_offset(double normalized) const;
};

struct GravityRunSpec {
    std::size_t shots = 20000;
    double shot_period = 1.0;       // s
    /// Total white noise in Δg/g per √Hz. Detection noise takes its share
    /// first; mirror vibration supplies the rest.
    double sensitivity = 6e-8;
    std::size_t bin_size = 38;
    int allan_per_decade = 8;

    void validate() const;
};

struct GravityRun {
    std::vector<double> time;
    std::vector<double> true_gravity;       // projected on the beam
    std::vector<double> normalized;
    std::vector<double> measured_gravity;
    std::vector<double> residual;           // (g − fitted tide)/ḡ
    double mirror_phase_rms = 0.0;          // rad per pulse
    double detection_phase_noise = 0.0;     // rad per shot, at the bias
    SinusoidFit tide_fit;                   // on the shot series
    std::vector<Bin> bins;                  // of measured_gravity
    std::vector<double> bin_time;           // centre of each bin
    SinusoidFit binned_tide_fit;            // on the bin means
    AllanCurve allan;                       // of `residual`
};

/// Mid-fringe gravimeter run over a tide. Each shot's phase is
/// (k_eff g cosθ(t) − 2πα)T² plus mirror noise; the fringe is read through
/// `response`, detected with `noise`, and inverted on the branch.
/// α is resonant for ḡ at t = 0 unless `seq.sweep_rate` is set.
GravityRun run_gravity_series(const GravityRunSpec& spec, const FringeResponse& response,
                              const MZISequence& seq, const TideModel& tide,
                              const NoiseModel& noise, std::uint64_t master_seed,
                              const AtomSpecies& species = AtomSpecies::rubidium87());

/// White Δg/g series with the given sensitivity per √Hz.
std::vector<double> white_gravity_series(double sensitivity, double shot_period,
                                         std::size_t count, std::uint64_t master_seed);

}  // namespace bragg
