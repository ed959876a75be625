#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bragg/bvs.hpp"
#include "bragg/constants.hpp"
#include "bragg/environment.hpp"
#include "bragg/ladder.hpp"
#include "bragg/sequence.hpp"

namespace cli {

using nlohmann::json;

/// start + i·step for i < points.
struct Grid {
    double start = 0.0;
    double step = 0.0;
    int points = 0;

    std::vector<double> values() const;
};

struct PulseBlock {
    int order = 2;
    double rms_width = 15e-6;
    double q_hbar_k = 0.0;
    double half_width_sigmas = 3.0;
    Grid area{0.05, 0.05, 60};  // ∫Ω dt in units of π
};

struct SequenceBlock {
    int order = 2;
    int input_site = 0;
    double interrogation_time = 10e-3;
    double rms_width = 15e-6;
    std::optional<double> sweep_rate;        // Hz/s; null = resonant
    double final_phase = 0.0;
    std::string coherence = "class_resolved";
    std::optional<double> beamsplitter_rabi; // rad/s; null = calibrate
    std::optional<double> mirror_rabi;
};

struct NoiseBlock {
    double mirror_phase_rms = 0.0;
    std::optional<double> detection_snr = 50.0;  // null = no detection noise
    double tilt_drift = 0.0;
};

struct TideBlock {
    struct Component {
        double amplitude = 0.0;
        double period = 0.0;  // s
        double phase = 0.0;
    };
    double mean_gravity = 9.81;
    std::vector<Component> components{{1e-6, 12.42 * 3600.0, 0.0}};
};

struct ScanBlock {
    std::string target = "laser_phase";  // laser_phase | sweep_rate | interrogation_time
    Grid grid{0.0, 2.0 * bragg::constants::pi / 32.0, 64};
    double shot_period = 0.0;
};

struct FitBlock {
    int harmonics = 3;
    int phase_points = 24;
    double phase_periods = 2.0;
    double peak_threshold = 0.5;
};

struct BvsBlock {
    bragg::LatticeRamp ramp;
    Grid momentum{-2.0, 0.1, 41};
};

struct GradiometerBlock {
    double upper_momentum = 8.0;
    double lower_momentum = 2.0;
    int coupling_order = 3;
    double bvs_separation = 50e-3;
    double gradient = 0.0;
    int shots = 200;
    std::optional<double> laser_phase;  // null = steepest point of the lower fringe
};

struct GravityRunBlock {
    int shots = 20000;
    double shot_period = 1.0;
    double sensitivity = 6e-8;
    int bin_size = 38;
    double interrogation_time = 60e-3;
    std::string response = "simulated";  // simulated | sinusoid
    double contrast = 0.8;               // sinusoid response only
};

struct AllanBlock {
    std::optional<std::string> input;  // CSV path; null = synthetic white noise
    std::string column = "value";
    double shot_period = 1.0;
    double sensitivity = 6e-8;
    int shots = 20000;
    int per_decade = 8;
    std::vector<double> tau;  // empty = logarithmic default grid
};

struct ClassOracleBlock {
    std::optional<int> j;     // null = sequence order
    int a_min = -6;
    int a_max = 8;
    std::string weights = "simulated";  // simulated | uniform
    std::optional<int> port;            // null = input site
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    double mass = 0.0;        // kg; filled from the species default
    double wavelength = 0.0;  // m
    double tilt = 0.0;        // rad
    bragg::EvolutionConfig evolution;
    PulseBlock pulse;
    SequenceBlock sequence;
    bragg::EnsembleSpec ensemble;
    NoiseBlock noise;
    TideBlock tide;
    ScanBlock scan;
    FitBlock fit;
    BvsBlock bvs;
    GradiometerBlock gradiometer;
    GravityRunBlock gravity_run;
    AllanBlock allan;
    ClassOracleBlock class_oracle;
    std::string output_dir = "out";

    ExperimentConfig();

    bragg::AtomSpecies species() const;
    bragg::NoiseModel noise_model() const;
    bragg::TideModel tide_model() const;
    /// Sequence with pulses calibrated unless both amplitudes are given.
    bragg::MZISequence build_sequence(double interrogation_time) const;
};

/// Parses a config document; missing keys take defaults, unknown keys and
/// type mismatches raise bragg::ConfigError naming the key path.
ExperimentConfig parse_config(const json& doc);
ExperimentConfig load_config(const std::string& path);
/// Fully resolved echo; parse_config(to_json(c)) reproduces c.
json to_json(const ExperimentConfig& c);

/// Checks the blocks a subcommand uses (grids non-empty, scan target).
void validate_for(const ExperimentConfig& c, const std::string& command);

}  // namespace cli
