#include "bragg/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bragg/constants.hpp"

namespace bragg {

std::mt19937_64 make_rng(std::uint64_t master_seed, std::uint64_t shot, RngStream stream)
{
    const auto id = static_cast<std::uint64_t>(stream);
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(shot),        static_cast<std::uint32_t>(shot >> 32),
        static_cast<std::uint32_t>(id),          static_cast<std::uint32_t>(id >> 32),
    };
    return std::mt19937_64(seq);
}

void NoiseModel::validate() const
{
    if (!(mirror_phase_rms >= 0.0)) throw std::invalid_argument("mirror phase rms must be >= 0");
    if (!(detection_snr > 0.0)) throw std::invalid_argument("detection snr must be positive");
    if (!std::isfinite(tilt) || !std::isfinite(tilt_drift))
        throw std::invalid_argument("tilt and tilt drift must be finite");
}

TideModel TideModel::demo(double mean_gravity)
{
    TideModel m;
    m.mean_gravity = mean_gravity;
    m.components.push_back({1.0e-6, 2.0 * constants::pi / (12.42 * 3600.0), 0.0});
    return m;
}

void TideModel::validate() const
{
    if (!std::isfinite(mean_gravity)) throw std::invalid_argument("mean gravity must be finite");
    for (const auto& c : components) {
        if (!(c.amplitude >= 0.0)) throw std::invalid_argument("tide amplitudes must be >= 0");
        if (!std::isfinite(c.angular_frequency) || !std::isfinite(c.phase))
            throw std::invalid_argument("tide frequency and phase must be finite");
    }
}

std::array<double, 3> sample_mirror_phases(const NoiseModel& model, std::mt19937_64& rng)
{
    if (model.mirror_phase_rms == 0.0) return {0.0, 0.0, 0.0};
    std::normal_distribution<double> dist(0.0, model.mirror_phase_rms);
    std::array<double, 3> out{};
    for (double& v : out) v = dist(rng);
    return out;
}

std::vector<double> apply_detection_noise(const std::vector<double>& populations,
                                          const NoiseModel& model, std::mt19937_64& rng)
{
    if (std::isinf(model.detection_snr)) return populations;
    std::normal_distribution<double> dist(0.0, 1.0 / model.detection_snr);
    std::vector<double> out(populations.size());
    for (std::size_t i = 0; i < populations.size(); ++i)
        out[i] = std::clamp(populations[i] + dist(rng), 0.0, 1.0);
    return out;
}

double synthesize_tide(const TideModel& model, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("tide time must be >= 0");
    double g = model.mean_gravity;
    for (const auto& c : model.components) g += c.amplitude * std::cos(c.angular_frequency * t + c.phase);
    return g;
}

double tilt_projection_drift(const NoiseModel& model, double t)
{
    if (!(t >= 0.0)) throw std::invalid_argument("tilt time must be >= 0");
    return std::cos(model.tilt + model.tilt_drift * t / 3600.0);
}

}  // namespace bragg
