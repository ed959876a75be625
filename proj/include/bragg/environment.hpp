#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace bragg {

/// Independent random streams of one shot.
enum class RngStream : std::uint64_t {
    ensemble = 0,
    mirror = 1,
    detection_lower = 2,
    detection_upper = 3,
};

/// Generator for (master seed, shot index, stream). Distinct triples give
/// statistically independent sequences; there is no shared state.
std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t shot, RngStream stream);

struct NoiseModel {
    double mirror_phase_rms = 0.0;   // rad per pulse
    double detection_snr = 50.0;     // +inf disables detection noise
    double tilt = 0.0;               // beam tilt from vertical at t = 0, rad
    double tilt_drift = 0.0;         // rad per hour

    static NoiseModel noiseless()
    {
        NoiseModel m;
        m.detection_snr = std::numeric_limits<double>::infinity();
        return m;
    }
    void validate() const;
};

struct TideComponent {
    double amplitude = 0.0;          // m/s^2
    double angular_frequency = 0.0;  // rad/s
    double phase = 0.0;              // rad
};

struct TideModel {
    double mean_gravity = 9.81;
    std::vector<TideComponent> components;

    /// Single M2-like line: 12.42 h period, 1e-6 m/s^2.
    static TideModel demo(double mean_gravity = 9.81);
    void validate() const;
};

/// Per-pulse mirror phases. Zero rms returns exact zeros.
std::array<double, 3> sample_mirror_phases(const NoiseModel& model, std::mt19937_64& rng);

/// Adds N(0, 1/snr) to each port signal and clamps to [0, 1].
std::vector<double> apply_detection_noise(const std::vector<double>& populations,
                                          const NoiseModel& model, std::mt19937_64& rng);

/// ḡ + Σ A cos(ωt + φ).
double synthesize_tide(const TideModel& model, double t);

/// cos of the beam tilt at time t for a linear drift.
double tilt_projection_drift(const NoiseModel& model, double t);

}  // namespace bragg
