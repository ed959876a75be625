#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "bragg/analysis.hpp"
#include "bragg/environment.hpp"
#include "bragg/ladder.hpp"

namespace bragg {

/// Quasimomentum samples of the selected cloud.
struct EnsembleSpec {
    int sample_count = 200;
    double sigma_q = 0.42;              // rms, units of ħk
    std::vector<double> explicit_q;     // overrides the Gaussian when non-empty
    std::uint64_t seed = 1;

    /// Gaussian draws truncated to |q| <= 1 (the selected band), or the
    /// explicit list. σ_q = 0 yields a single q = 0 sample.
    std::vector<double> draw() const;
    void validate() const;
};

/// How paths recombine at the last pulse.
enum class Coherence {
    /// Paths interfere only within a class j = n1 + n2 (same end point);
    /// the cloud's coherence length is far below the class spacing.
    class_resolved,
    /// Every path reaching the same momentum interferes.
    plane_wave,
};

struct MZISequence {
    int order = 2;                      // signed transition order
    int input_site = 0;
    double interrogation_time = 10e-3;  // pulse centre to pulse centre, s
    PulseSpec beamsplitter;
    PulseSpec mirror;
    std::optional<double> sweep_rate;   // α, Hz/s; unset → resonant for the shot's g
    double final_phase = 0.0;           // φ_L added to the last pulse, rad
    Coherence coherence = Coherence::class_resolved;

    int output_site() const noexcept { return input_site + order; }
    /// Pulse areas calibrated for |order| at q = 0: the mirror sits on the
    /// first Rabi-lobe maximum, the beamsplitter at half that transfer.
    static MZISequence calibrated(const AtomSpecies& species, int order,
                                  double interrogation_time, double rms_width = 15e-6,
                                  const EvolutionConfig& cfg = {}, int input_site = 0);
    void validate() const;
};

/// Which shot this is, for noise streams and time-dependent environment.
struct ShotContext {
    std::uint64_t master_seed = 1;
    std::uint64_t shot_index = 0;
    double time = 0.0;  // s since start of run
};

struct ShotResult {
    std::map<int, double> populations;       // detected fractions per ladder site
    double normalized = 0.0;                 // p_in / (p_in + p_out)
    double ideal_normalized = 0.0;           // same before detection noise
    std::array<double, 3> mirror_phases{};   // rad
    std::array<double, 2> detection_noise{}; // added to (p_in, p_out)
};

/// Propagators for one sequence and ensemble, reused across laser phases
/// and noise draws. Without residual chirp the pulses are also reused
/// across interrogation times.
class ShotEngine {
public:
    ShotEngine(const AtomSpecies& species, std::vector<double> q_samples, MZISequence seq,
               double residual_chirp, const EvolutionConfig& cfg = {}, int threads = 1);
    ~ShotEngine();
    ShotEngine(ShotEngine&&) noexcept;
    ShotEngine& operator=(ShotEngine&&) noexcept;

    const MZISequence& sequence() const noexcept;
    void set_interrogation_time(double t);
    /// Ensemble-averaged populations for extra per-pulse phases.
    std::map<int, double> populations(const std::array<double, 3>& extra_phases) const;
    /// Independent evaluations in parallel; output order follows input.
    std::vector<std::map<int, double>> populations(
        const std::vector<std::array<double, 3>>& extra_phases) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Chirp left over in the falling frame: α0(g cosθ) − α, Hz/s.
double residual_chirp(const AtomSpecies& species, const MZISequence& seq, double gravity,
                      double cos_tilt);

/// Applies the shot's noise to ensemble populations.
ShotResult finish_shot(const std::map<int, double>& clean, const MZISequence& seq,
                       const std::array<double, 3>& mirror, const NoiseModel& noise,
                       std::mt19937_64& detection_rng);

ShotResult run_shot(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                    const NoiseModel& noise, const ShotContext& ctx,
                    const AtomSpecies& species = AtomSpecies::rubidium87(),
                    const EvolutionConfig& cfg = {});

struct ScanOptions {
    std::uint64_t master_seed = 1;
    std::uint64_t first_shot = 0;
    double shot_period = 0.0;  // s between grid points, for drifting tilt
    int threads = 1;
    EvolutionConfig evolution{};
};

/// One shot per laser-phase grid point, each with its own noise draws.
FringeScan scan_fringe(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                       const NoiseModel& noise, const std::vector<double>& phase_grid,
                       const ScanOptions& opt = {},
                       const AtomSpecies& species = AtomSpecies::rubidium87());

/// Same with the sweep rate stepped instead; the scan phase axis is the
/// φ_L-equivalent 2π(α0 − α)T², sorted ascending.
FringeScan scan_sweep_rate(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                           const NoiseModel& noise, const std::vector<double>& sweep_rates,
                           const ScanOptions& opt = {},
                           const AtomSpecies& species = AtomSpecies::rubidium87());

struct ContrastPoint {
    double interrogation_time = 0.0;
    double contrast = 0.0;
    HarmonicFit fit;
};

/// Fringe contrast for each T from a fit with `harmonics` terms.
std::vector<ContrastPoint> scan_contrast_vs_t(const EnsembleSpec& ens, const MZISequence& seq,
                                              const std::vector<double>& t_grid, double gravity,
                                              const NoiseModel& noise,
                                              const std::vector<double>& phase_grid,
                                              int harmonics = 3, const ScanOptions& opt = {},
                                              const AtomSpecies& species = AtomSpecies::rubidium87());

/// Uniform grid of `points` phases covering [0, periods·2π).
std::vector<double> uniform_phase_grid(int points, double periods = 1.0);

struct GradiometerSpec {
    double upper_momentum = 8.0;   // ħk, launched first
    double lower_momentum = 2.0;   // ħk
    int coupling_order = 3;
    double bvs_separation = 50e-3; // s between the two launches
    MZISequence timing;            // pulses and T shared by both clouds

    /// Height of the upper cloud above the lower one.
    double baseline(const AtomSpecies& species) const;
    int upper_site() const;
    int lower_site() const;
    /// Sequences for each cloud: the lower one goes up by coupling_order,
    /// the upper one down. Shares `timing` pulse areas.
    MZISequence lower_sequence(const AtomSpecies& species) const;
    MZISequence upper_sequence(const AtomSpecies& species) const;
    /// Rejects momenta off the ladder and Bragg resonances of one cloud's
    /// frequency that fall on a low-order transition of the other cloud.
    void validate(const AtomSpecies& species) const;
};

struct GradiometerScan {
    FringeScan lower;
    FringeScan upper;
    double baseline = 0.0;
};

/// Both clouds scanned with common mirror phases and independent detection.
GradiometerScan run_gradiometer(const GradiometerSpec& spec, const EnsembleSpec& ens,
                                double gravity, double gradient, const NoiseModel& noise,
                                const std::vector<double>& phase_grid, const ScanOptions& opt = {},
                                const AtomSpecies& species = AtomSpecies::rubidium87());

struct GradiometerShots {
    std::vector<ShotResult> lower;
    std::vector<ShotResult> upper;
    double baseline = 0.0;
};

/// Repeated shots at one laser phase.
GradiometerShots run_gradiometer_shots(const GradiometerSpec& spec, const EnsembleSpec& ens,
                                       double gravity, double gradient, const NoiseModel& noise,
                                       double laser_phase, std::size_t shots,
                                       const ScanOptions& opt = {},
                                       const AtomSpecies& species = AtomSpecies::rubidium87());


/// Conjugated q = 0 amplitudes of the class-j paths (a, j − a) from the
/// input site to `port`, each pulse referenced to its centre so that the
/// dark periods last exactly T. Paths leaving the ladder window get zero.
/// Used as caller weights of enumerate_interferometer_class.
std::vector<std::complex<double>> class_path_weights(const AtomSpecies& species,
                                                     const MZISequence& seq, int j, int a_min,
                                                     int a_max, int port,
                                                     const EvolutionConfig& cfg = {});

}  // namespace bragg
