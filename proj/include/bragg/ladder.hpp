#pragma once

#include <complex>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "bragg/core_physics.hpp"

namespace bragg {

/// Amplitudes of plane waves |2nħk + q> on the window n ∈ [n_min, n_max].
///
/// The quasimomentum q is stored in units of ħk and satisfies |q| <= 1.
/// Amplitudes are Schrödinger-picture amplitudes in the frame falling with
/// the cloud; `time` is the absolute time the amplitudes refer to.
class MomentumLadderState {
public:
    MomentumLadderState(AtomSpecies species, int n_min, int n_max, double q_hbar_k,
                        double time = 0.0);

    /// All population in `site`, window [site - guard, site + guard].
    static MomentumLadderState plane_wave(const AtomSpecies& species, int site,
                                          double q_hbar_k, int guard_sites);
    /// Plane wave of momentum p (units of ħk). p is split into the nearest
    /// ladder site and a residual |q| <= 1.
    static MomentumLadderState from_momentum(const AtomSpecies& species, double p_hbar_k,
                                             int half_window);

    const AtomSpecies& species() const noexcept { return species_; }
    int n_min() const noexcept { return n_min_; }
    int n_max() const noexcept { return n_min_ + static_cast<int>(amps_.size()) - 1; }
    int size() const noexcept { return static_cast<int>(amps_.size()); }
    bool contains(int site) const noexcept { return site >= n_min() && site <= n_max(); }

    double q_hbar_k() const noexcept { return q_; }
    /// q in kg m/s.
    double quasimomentum() const noexcept;
    double time() const noexcept { return time_; }
    void set_time(double t) noexcept { time_ = t; }

    std::complex<double> amplitude(int site) const;
    void set_amplitude(int site, std::complex<double> value);
    const Eigen::VectorXcd& amplitudes() const noexcept { return amps_; }
    Eigen::VectorXcd& amplitudes() noexcept { return amps_; }

    double population(int site) const;
    double norm() const noexcept { return amps_.squaredNorm(); }
    /// Population in the `edge_sites` outermost sites on each side.
    double edge_population(int edge_sites = 2) const noexcept;
    /// Mean momentum in units of ħk.
    double mean_momentum() const noexcept;

    /// Relabel sites so that `site` becomes site 0.
    MomentumLadderState reindexed(int site) const;
    /// Same amplitudes embedded in a window enlarged by `extra` sites per side.
    MomentumLadderState widened(int extra) const;

private:
    AtomSpecies species_;
    int n_min_;
    double q_;
    double time_;
    Eigen::VectorXcd amps_;
};

/// Gaussian two-frequency Bragg pulse. The pulse starts at the state's
/// current time and lasts `duration`, centred on the Gaussian peak.
///
/// The lattice phase at absolute time t is
///   φ + δ·t + π·chirp·t²,
/// and the coupling |n> -> |n+1> carries e^{-i(lattice phase)}.
struct PulseSpec {
    double rms_width = 15e-6;             // σ, s
    double duration = 90e-6;              // truncated total length, s
    double peak_rabi = 0.0;               // Ω0, two-photon Rabi frequency, rad/s
    double frequency_difference = 0.0;    // δ, rad/s
    double laser_phase = 0.0;             // φ, rad
    double chirp = 0.0;                   // residual frequency sweep, Hz/s

    /// Pulse truncated at ±`half_width_sigmas`·σ with δ resonant for |0> -> |order>.
    static PulseSpec resonant(const AtomSpecies& species, int order, double rms_width,
                              double peak_rabi, double laser_phase = 0.0,
                              double half_width_sigmas = 3.0);

    double envelope(double time_from_center) const noexcept;
    /// ∫Ω dt over the truncated pulse.
    double area() const noexcept;
    void validate() const;
};

struct EvolutionConfig {
    double max_step = 5e-6;          // s
    double error_tolerance = 1e-6;   // bound on the propagator matrix error per evolution
    int ladder_guard_sites = 6;
    double leakage_limit = 1e-4;     // edge population that signals truncation

    void validate() const;
};

/// Time-dependent drive of the momentum ladder.
///
/// Rotating-frame Hamiltonian (ħ = 1, rad/s):
///   H_nn      = 4ω_r (n + q/2)² − n Θ'(t)
///   H_{n+1,n} = Ω(t)/2 · e^{-iφ}
/// where Θ is the lattice phase.
struct LatticeDrive {
    std::function<double(double)> rabi;         // Ω(t)
    std::function<double(double)> phase_rate;   // Θ'(t)
    std::function<double(double)> phase;        // Θ(t)
    double laser_phase = 0.0;                   // φ
    double t_start = 0.0;
    double t_end = 0.0;
    /// Times where the drive has kinks; integration restarts there.
    std::vector<double> breakpoints;
    /// Shortest time scale of the drive, used for the first step.
    double time_scale = 0.0;
};

/// Unitary for one drive on a fixed window.
///
/// Stores the rotating-frame propagator with φ = 0; the laser phase and
/// lattice phase enter only through diagonal gauge factors, so the same
/// object serves every laser phase.
class LadderPropagator {
public:
    LadderPropagator(int n_min, Eigen::MatrixXcd rotating, double lattice_phase_start,
                     double lattice_phase_end, double laser_phase, double t_start,
                     double t_end);

    int n_min() const noexcept { return n_min_; }
    int size() const noexcept { return static_cast<int>(rotating_.rows()); }
    double t_start() const noexcept { return t_start_; }
    double t_end() const noexcept { return t_end_; }
    double laser_phase() const noexcept { return laser_phase_; }
    const Eigen::MatrixXcd& rotating_frame() const noexcept { return rotating_; }

    /// Falling-frame unitary for laser phase φ + extra_phase.
    Eigen::MatrixXcd unitary(double extra_phase = 0.0) const;
    /// In-place application to amplitude columns on the same window.
    void apply(Eigen::Ref<Eigen::MatrixXcd> columns, double extra_phase = 0.0) const;

private:
    int n_min_;
    Eigen::MatrixXcd rotating_;
    double theta_start_;
    double theta_end_;
    double laser_phase_;
    double t_start_;
    double t_end_;
};

/// Integrates a drive on [n_min, n_max] at quasimomentum q.
LadderPropagator propagate_drive(const AtomSpecies& species, int n_min, int n_max,
                                 double q_hbar_k, const LatticeDrive& drive,
                                 const EvolutionConfig& cfg);

/// Propagator of `pulse` starting at absolute time `t_start`.
LadderPropagator pulse_propagator(const AtomSpecies& species, int n_min, int n_max,
                                  double q_hbar_k, const PulseSpec& pulse, double t_start,
                                  const EvolutionConfig& cfg);

/// Evolves `state` through the whole pulse. Throws TruncationError when the
/// outermost guard sites end up holding more than cfg.leakage_limit.
MomentumLadderState apply_pulse(const MomentumLadderState& state, const PulseSpec& pulse,
                                const EvolutionConfig& cfg = {});

/// Free fall for `duration`: c_n *= exp(-i 4ω_r (n + q/2)² duration).
MomentumLadderState free_propagate(const MomentumLadderState& state, double duration);

/// Throws TruncationError if the edge population exceeds `limit`.
void check_truncation(const MomentumLadderState& state, double limit);

struct TransferSample {
    double peak_rabi;
    double transfer;
};

/// Fraction moved from |0> to |order> by a resonant Gaussian pulse.
double simulate_transfer(const AtomSpecies& species, int order, double rms_width,
                         double q_hbar_k, double peak_rabi, const EvolutionConfig& cfg = {});

/// Smallest Ω0 whose |0> -> |order> transfer equals `target` (to 1e-5),
/// searched on the first Rabi lobe. Throws CalibrationError with the
/// diagnostic sweep when the lobe never reaches the target.
double calibrate_pulse_amplitude(const AtomSpecies& species, double target, int order,
                                 double rms_width, double q_hbar_k,
                                 const EvolutionConfig& cfg = {});

/// Ω0 at the maximum of the first Rabi lobe, with the transfer reached there.
TransferSample first_lobe_peak(const AtomSpecies& species, int order, double rms_width,
                               double q_hbar_k, const EvolutionConfig& cfg = {});

}  // namespace bragg
