#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bragg/core_physics.hpp"

namespace bragg {

struct ScanMetadata {
    double interrogation_time = 0.0;  // s
    int order = 0;                    // signed transition order
    int input_site = 0;
    std::uint64_t seed = 0;
    std::string control = "laser_phase";  // what was stepped
};

/// Fringe scan on a φ_L-equivalent phase grid.
///
/// `ports` maps ladder site to detected population; `normalized` is the
/// input-port fraction p_in / (p_in + p_out). `control` holds the value
/// that was actually stepped (laser phase or sweep rate) for each point.
struct FringeScan {
    std::vector<double> phase;
    std::vector<double> control;
    std::map<int, std::vector<double>> ports;
    std::vector<double> normalized;
    ScanMetadata meta;

    std::size_t size() const noexcept { return phase.size(); }
    void validate() const;
};

/// offset + Σ c_n cos(nΦ + θ_n), n = 1..N.
struct HarmonicFit {
    double offset = 0.0;
    std::vector<double> amplitude;
    std::vector<double> phase;
    double residual_rms = 0.0;

    int harmonics() const noexcept { return static_cast<int>(amplitude.size()); }
    double evaluate(double x) const noexcept;
    double derivative(double x) const noexcept;
    /// Index (1-based) of the largest c_n.
    int dominant_harmonic() const;
};

/// Linear least squares in the cos/sin basis. Throws FitError when the
/// design matrix is rank deficient.
HarmonicFit fit_harmonics(const std::vector<double>& phase, const std::vector<double>& values,
                          int harmonics);
HarmonicFit fit_harmonics(const FringeScan& scan, int harmonics);

struct Contrast {
    double value = 0.0;
    /// The fitted curve dipped below zero and was clamped before use.
    bool clamped = false;
};

/// (max − min)/(max + min) of the fitted curve on a dense grid.
Contrast fringe_contrast(const HarmonicFit& fit);

/// Δφ / (m k_eff T²).
double phase_to_gravity(double phase_shift, int harmonic, double k_eff, double interrogation_time);

/// Phase in [lo, hi] where the fit equals `value`; the fit must be monotonic
/// there. Values outside the branch range clamp to the nearer end.
double invert_fringe(const HarmonicFit& fit, double value, double lo, double hi);

/// Phase in [0, 2π) of maximum |slope| of the fitted fringe.
double steepest_point(const HarmonicFit& fit);

struct AllanCurve {
    std::vector<double> tau;
    std::vector<double> deviation;
    std::vector<double> omitted_tau;  // requested but not enough data

    /// Least-squares slope of log σ against log τ over [tau_min, tau_max].
    double loglog_slope(double tau_min = 0.0,
                        double tau_max = std::numeric_limits<double>::infinity()) const;
    /// Value at the grid point nearest to `t`.
    double at(double t) const;
};

/// Overlapping Allan deviation. Each τ is rounded to a whole number of shots.
AllanCurve allan_deviation(const std::vector<double>& series, double shot_period,
                           const std::vector<double>& tau_grid);

/// Logarithmically spaced averaging times between `shot_period` and a
/// quarter of the record.
std::vector<double> default_tau_grid(std::size_t length, double shot_period, int per_decade = 8);

struct Correlation {
    std::vector<double> z_first;
    std::vector<double> z_second;
    double pearson = 0.0;
};

Correlation gradiometer_correlation(const std::vector<double>& first,
                                    const std::vector<double>& second);

struct ClassTrajectory {
    int a = 0;
    int b = 0;
    double phase = 0.0;
};

struct InterferometerClass {
    int j = 0;
    double interrogation_time = 0.0;
    std::vector<ClassTrajectory> trajectories;
    double contrast_proxy = 0.0;
};

/// Pairs a + b = j with a in [a_min, a_max] and their relative phases.
/// `weights` (aligned with a_min..a_max) may be empty for uniform weights.
InterferometerClass enumerate_interferometer_class(int j, int a_min, int a_max,
                                                   double interrogation_time,
                                                   const AtomSpecies& species,
                                                   const std::vector<double>& weights = {});

/// Same with complex path weights: proxy |Σ w e^{iφ}| / Σ|w|.
InterferometerClass enumerate_interferometer_class(
    int j, int a_min, int a_max, double interrogation_time, const AtomSpecies& species,
    const std::vector<std::complex<double>>& weights);

/// Number of distinct values modulo 2π, within `tolerance`.
int congruence_groups(const std::vector<double>& phases, double tolerance = 1e-6);

struct Bin {
    double mean = 0.0;
    double standard_error = 0.0;
    std::size_t count = 0;
    std::size_t first = 0;           // index of the first sample
    bool error_defined = false;      // false for single-sample bins
};

/// Contiguous non-overlapping bins; a trailing partial bin is dropped.
std::vector<Bin> bin_timeseries(const std::vector<double>& series, std::size_t bin_size);

struct SinusoidFit {
    double offset = 0.0;
    std::vector<double> amplitude;
    std::vector<double> phase;
    std::vector<double> amplitude_error;  // 1σ from the residual scatter
};

/// y ≈ offset + Σ A_i cos(ω_i t + φ_i) at known angular frequencies.
SinusoidFit fit_sinusoids(const std::vector<double>& t, const std::vector<double>& y,
                          const std::vector<double>& angular_frequencies);

/// Local maxima of y above min + threshold·(max − min), refined by a
/// parabola through each maximum and its neighbours.
std::vector<double> peak_positions(const std::vector<double>& x, const std::vector<double>& y,
                                   double threshold = 0.5);

}  // namespace bragg
