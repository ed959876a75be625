#include "bragg/gravimeter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bragg/constants.hpp"
#include "bragg/errors.hpp"

namespace bragg {

using constants::pi;

FringeResponse FringeResponse::from_fit(const HarmonicFit& fit, double port_total)
{
    if (!(port_total > 0.0)) throw ConfigError("fringe response needs a positive port total");
    FringeResponse r;
    r.fit = fit;
    r.port_total = port_total;
    return r.at(steepest_point(fit));
}

FringeResponse FringeResponse::at(double operating_point) const
{
    FringeResponse r = *this;
    r.bias = operating_point;
    const double s = fit.derivative(r.bias);
    if (s == 0.0) throw NumericalError("flat fringe has no mid-fringe point");
    constexpr double step = 1e-3;
    auto walk = [&](double dir) {
        double x = r.bias;
        while (std::abs(x - r.bias) < pi) {
            const double next = x + dir * step;
            if (fit.derivative(next) * s <= 0.0) break;
            x = next;
        }
        return x;
    };
    r.branch_lo = walk(-1.0);
    r.branch_hi = walk(1.0);
    return r;
}

FringeResponse FringeResponse::from_scan(const FringeScan& scan, int harmonics)
{
    double total = 0.0;
    const auto& in = scan.ports.at(scan.meta.input_site);
    const auto& out = scan.ports.at(scan.meta.input_site + scan.meta.order);
    for (std::size_t i = 0; i < scan.size(); ++i) total += in[i] + out[i];
    return from_fit(fit_harmonics(scan, harmonics), total / static_cast<double>(scan.size()));
}

FringeResponse FringeResponse::sinusoid(double contrast)
{
    HarmonicFit f;
    f.offset = 0.5;
    f.amplitude = {0.5 * contrast};
    f.phase = {0.0};
    return from_fit(f);
}

double FringeResponse::phase_offset(double normalized) const
{
    return invert_fringe(fit, normalized, branch_lo, branch_hi) - bias;
}

void GravityRunSpec::validate() const
{
    if (shots < 2) throw ConfigError("gravity run needs at least two shots");
    if (!(shot_period > 0.0)) throw ConfigError("shot period must be positive");
    if (!(sensitivity >= 0.0)) throw ConfigError("sensitivity must be non-negative");
    if (bin_size < 1) throw ConfigError("bin size must be at least 1");
    if (allan_per_decade < 1) throw ConfigError("Allan grid needs at least one point per decade");
}

GravityRun run_gravity_series(const GravityRunSpec& spec, const FringeResponse& response,
                              const MZISequence& seq, const TideModel& tide,
                              const NoiseModel& noise, std::uint64_t master_seed,
                              const AtomSpecies& species)
{
    spec.validate();
    tide.validate();
    noise.validate();
    const double T = seq.interrogation_time;
    if (!(T > 0.0)) throw ConfigError("interrogation time must be positive");
    const BeamGeometry geom(species);
    const double k_eff = geom.k_eff();
    const double gbar = tide.mean_gravity;
    const double alpha =
        seq.sweep_rate ? *seq.sweep_rate : k_eff * gbar * tilt_projection_drift(noise, 0.0) / (2.0 * pi);

    GravityRun run;
    const double f0 = response.fit.evaluate(response.bias);
    const double a = response.port_total;
    const double sigma_norm = std::isinf(noise.detection_snr)
                                  ? 0.0
                                  : std::hypot(1.0 - f0, f0) / (noise.detection_snr * a);
    run.detection_phase_noise = sigma_norm / std::abs(response.slope());
    const double target = spec.sensitivity * gbar * k_eff * T * T / std::sqrt(spec.shot_period);
    if (spec.sensitivity > 0.0) {
        if (run.detection_phase_noise > target)
            throw ConfigError("detection noise alone exceeds the requested sensitivity");
        run.mirror_phase_rms =
            std::sqrt(target * target - run.detection_phase_noise * run.detection_phase_noise) /
            std::sqrt(6.0);
    } else {
        run.mirror_phase_rms = noise.mirror_phase_rms;
    }
    NoiseModel shot_noise = noise;
    shot_noise.mirror_phase_rms = run.mirror_phase_rms;

    const std::size_t n = spec.shots;
    run.time.resize(n);
    run.true_gravity.resize(n);
    run.normalized.resize(n);
    run.measured_gravity.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = spec.shot_period * static_cast<double>(i);
        const double g = synthesize_tide(tide, t) * tilt_projection_drift(noise, t);
        auto mirror_rng = make_rng(master_seed, i, RngStream::mirror);
        auto det_rng = make_rng(master_seed, i, RngStream::detection_lower);
        const auto m = sample_mirror_phases(shot_noise, mirror_rng);
        const double x = response.bias + (k_eff * g - 2.0 * pi * alpha) * T * T +
                         (m[0] - 2.0 * m[1] + m[2]);
        const double f = std::clamp(response.fit.evaluate(x), 0.0, 1.0);
        const auto p = apply_detection_noise({a * f, a * (1.0 - f)}, shot_noise, det_rng);
        if (!(p[0] + p[1] > 0.0))
            throw NumericalError("both interferometer ports are empty after detection noise");
        const double norm = p[0] / (p[0] + p[1]);
        const double phi = response.phase_offset(norm);
        run.time[i] = t;
        run.true_gravity[i] = g;
        run.normalized[i] = norm;
        run.measured_gravity[i] = (phi / (T * T) + 2.0 * pi * alpha) / k_eff;
    }

    std::vector<double> omega;
    for (const auto& c : tide.components) omega.push_back(c.angular_frequency);
    run.tide_fit = fit_sinusoids(run.time, run.measured_gravity, omega);
    run.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double model = run.tide_fit.offset;
        for (std::size_t c = 0; c < omega.size(); ++c)
            model += run.tide_fit.amplitude[c] * std::cos(omega[c] * run.time[i] + run.tide_fit.phase[c]);
        run.residual[i] = (run.measured_gravity[i] - model) / gbar;
    }

    run.bins = bin_timeseries(run.measured_gravity, spec.bin_size);
    std::vector<double> means;
    for (const auto& b : run.bins) {
        run.bin_time.push_back(
            run.time[b.first] + 0.5 * spec.shot_period * static_cast<double>(b.count - 1));
        means.push_back(b.mean);
    }
    if (means.size() > 2 * omega.size() + 1)
        run.binned_tide_fit = fit_sinusoids(run.bin_time, means, omega);

    run.allan = allan_deviation(run.residual, spec.shot_period,
                                default_tau_grid(n, spec.shot_period, spec.allan_per_decade));
    return run;
}

std::vector<double> white_gravity_series(double sensitivity, double shot_period,
                                         std::size_t count, std::uint64_t master_seed)
{
    if (!(sensitivity >= 0.0)) throw ConfigError("sensitivity must be non-negative");
    if (!(shot_period > 0.0)) throw ConfigError("shot period must be positive");
    auto rng = make_rng(master_seed, 0, RngStream::mirror);
    std::normal_distribution<double> dist(0.0, sensitivity / std::sqrt(shot_period));
    std::vector<double> y(count);
    for (auto& v : y) v = dist(rng);
    return y;
}

}  // namespace bragg
