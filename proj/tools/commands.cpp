#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "bragg/analysis.hpp"
#include "bragg/bvs.hpp"
#include "bragg/constants.hpp"
#include "bragg/core_physics.hpp"
#include "bragg/errors.hpp"
#include "bragg/gravimeter.hpp"
#include "bragg/parallel.hpp"
#include "bragg/sequence.hpp"

namespace cli {

using bragg::constants::pi;

namespace {

json fit_json(const bragg::HarmonicFit& fit)
{
    json j;
    j["offset"] = fit.offset;
    j["residual_rms"] = fit.residual_rms;
    j["dominant_harmonic"] = fit.dominant_harmonic();
    for (int n = 1; n <= fit.harmonics(); ++n) {
        j["c" + std::to_string(n)] = fit.amplitude[n - 1];
        j["theta" + std::to_string(n)] = fit.phase[n - 1];
    }
    const auto c = bragg::fringe_contrast(fit);
    j["contrast"] = c.value;
    j["contrast_clamped"] = c.clamped;
    return j;
}

bragg::ScanOptions scan_options(const ExperimentConfig& c, int threads)
{
    bragg::ScanOptions opt;
    opt.master_seed = c.seed;
    opt.shot_period = c.scan.shot_period;
    opt.threads = threads;
    opt.evolution = c.evolution;
    return opt;
}

std::vector<int> sorted_ports(const bragg::FringeScan& scan)
{
    std::vector<int> p;
    for (const auto& kv : scan.ports) p.push_back(kv.first);
    return p;
}

std::string scan_csv(const bragg::FringeScan& scan)
{
    std::vector<std::string> header{"phase", scan.meta.control, "normalized"};
    const auto ports = sorted_ports(scan);
    for (int p : ports) header.push_back("p_" + std::to_string(p));
    CsvTable t(header);
    for (std::size_t i = 0; i < scan.size(); ++i) {
        std::vector<double> row{scan.phase[i], scan.control[i], scan.normalized[i]};
        for (int p : ports) row.push_back(scan.ports.at(p)[i]);
        t.add_row(row);
    }
    return t.str();
}

json sequence_json(const bragg::MZISequence& s)
{
    return {{"order", s.order},
            {"input_site", s.input_site},
            {"interrogation_time", s.interrogation_time},
            {"beamsplitter_rabi", s.beamsplitter.peak_rabi},
            {"beamsplitter_area", s.beamsplitter.area()},
            {"mirror_rabi", s.mirror.peak_rabi},
            {"mirror_area", s.mirror.area()},
            {"pulse_duration", s.beamsplitter.duration}};
}

json peaks_json(const std::vector<double>& x, const std::vector<double>& y, double threshold,
                double revival)
{
    json j;
    std::vector<double> peaks;
    if (x.size() >= 3) peaks = bragg::peak_positions(x, y, threshold);
    j["peak_times"] = peaks;
    std::vector<double> spacing;
    for (std::size_t i = 1; i < peaks.size(); ++i) spacing.push_back(peaks[i] - peaks[i - 1]);
    j["peak_spacings"] = spacing;
    if (!spacing.empty()) {
        double m = 0.0;
        for (double s : spacing) m += s;
        j["mean_peak_spacing"] = m / static_cast<double>(spacing.size());
    } else {
        j["mean_peak_spacing"] = nullptr;
    }
    j["revival_period"] = revival;
    return j;
}

RunOutput cmd_pulse(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    const auto& p = c.pulse;
    const auto areas = p.area.values();
    const auto unit = bragg::PulseSpec::resonant(sp, p.order, p.rms_width, 1.0, 0.0,
                                                 p.half_width_sigmas);
    const int guard = c.evolution.ladder_guard_sites;
    std::vector<std::vector<double>> rows(areas.size());
    bragg::parallel_for(areas.size(), threads, [&](std::size_t i) {
        auto pulse = unit;
        pulse.peak_rabi = areas[i] * pi / unit.area();
        const auto start =
            bragg::MomentumLadderState(sp, -guard, p.order + guard, p.q_hbar_k);
        auto in = start;
        in.set_amplitude(0, 1.0);
        const auto out = bragg::apply_pulse(in, pulse, c.evolution);
        const double p0 = out.population(0);
        const double pn = out.population(p.order);
        rows[i] = {areas[i], pulse.peak_rabi, p0, pn, std::max(0.0, out.norm() - p0 - pn),
                   std::abs(out.norm() - 1.0)};
    });
    CsvTable t({"area_pi", "peak_rabi", "p_input", "p_target", "p_other", "norm_error"});
    std::size_t best = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        t.add_row(rows[i]);
        if (rows[i][3] > rows[best][3]) best = i;
    }
    RunOutput out;
    out.files["pulse.csv"] = t.str();
    out.summary["max_transfer"] = rows[best][3];
    out.summary["max_transfer_area_pi"] = rows[best][0];
    out.summary["max_transfer_peak_rabi"] = rows[best][1];
    out.summary["duration"] = unit.duration;
    out.summary["resonance"] = unit.frequency_difference;
    return out;
}

RunOutput cmd_bvs(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    const auto prof =
        bragg::selection_profile(sp, c.bvs.ramp, c.bvs.momentum.values(), c.evolution, threads);
    CsvTable t({"q_hbar_k", "transfer"});
    for (std::size_t i = 0; i < prof.q_hbar_k.size(); ++i)
        t.add_row({prof.q_hbar_k[i], prof.transfer[i]});
    RunOutput out;
    out.files["bvs_profile.csv"] = t.str();
    const auto peak = std::max_element(prof.transfer.begin(), prof.transfer.end());
    out.summary["peak_transfer"] = *peak;
    out.summary["peak_q_hbar_k"] = prof.q_hbar_k[static_cast<std::size_t>(peak - prof.transfer.begin())];
    try {
        out.summary["fwhm_hbar_k"] = prof.fwhm();
    } catch (const std::exception&) {
        out.summary["fwhm_hbar_k"] = nullptr;
    }
    out.summary["acceleration"] = c.bvs.ramp.acceleration(sp);
    out.summary["peak_rabi"] = c.bvs.ramp.peak_rabi(sp);
    out.summary["total_duration"] = c.bvs.ramp.total_duration();
    return out;
}

RunOutput cmd_fringe(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    const auto seq = c.build_sequence(c.sequence.interrogation_time);
    const double g = c.tide.mean_gravity;
    const auto noise = c.noise_model();
    const auto opt = scan_options(c, threads);
    bragg::FringeScan scan;
    RunOutput out;
    if (c.scan.target == "laser_phase") {
        scan = bragg::scan_fringe(c.ensemble, seq, g, noise, c.scan.grid.values(), opt, sp);
    } else {
        const double a0 = bragg::resonant_sweep_rate(g, bragg::BeamGeometry(sp, c.tilt));
        std::vector<double> rates;
        for (double d : c.scan.grid.values()) rates.push_back(a0 + d);
        scan = bragg::scan_sweep_rate(c.ensemble, seq, g, noise, rates, opt, sp);
        out.summary["resonant_sweep_rate"] = a0;
    }
    const auto fit = bragg::fit_harmonics(scan, c.fit.harmonics);
    out.files["fringe.csv"] = scan_csv(scan);
    out.summary["fit"] = fit_json(fit);
    out.summary["sequence"] = sequence_json(seq);
    out.summary["points"] = scan.size();
    return out;
}

RunOutput cmd_revivals(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    const auto t_grid = c.scan.grid.values();
    const auto seq = c.build_sequence(c.sequence.interrogation_time);
    const auto phases = bragg::uniform_phase_grid(c.fit.phase_points, c.fit.phase_periods);
    const auto pts = bragg::scan_contrast_vs_t(c.ensemble, seq, t_grid, c.tide.mean_gravity,
                                               c.noise_model(), phases, c.fit.harmonics,
                                               scan_options(c, threads), sp);
    std::vector<std::string> header{"interrogation_time", "contrast"};
    for (int n = 1; n <= c.fit.harmonics; ++n) header.push_back("c" + std::to_string(n));
    CsvTable t(header);
    std::vector<double> contrast;
    for (const auto& p : pts) {
        std::vector<double> row{p.interrogation_time, p.contrast};
        for (double a : p.fit.amplitude) row.push_back(a);
        t.add_row(row);
        contrast.push_back(p.contrast);
    }
    RunOutput out;
    out.files["revivals.csv"] = t.str();
    out.summary = peaks_json(t_grid, contrast, c.fit.peak_threshold, bragg::revival_period(sp));
    out.summary["sequence"] = sequence_json(seq);
    return out;
}

RunOutput cmd_class_oracle(const ExperimentConfig& c, int)
{
    const auto sp = c.species();
    const auto t_grid = c.scan.grid.values();
    const auto& o = c.class_oracle;
    const int j = o.j ? *o.j : c.sequence.order;
    std::vector<std::complex<double>> weights;
    if (o.weights == "simulated") {
        const auto seq = c.build_sequence(t_grid.front());
        weights = bragg::class_path_weights(sp, seq, j, o.a_min, o.a_max,
                                            o.port ? *o.port : c.sequence.input_site,
                                            c.evolution);
    } else {
        weights.assign(static_cast<std::size_t>(o.a_max - o.a_min + 1), 1.0);
    }
    CsvTable t({"interrogation_time", "contrast_proxy", "congruence_groups"});
    std::vector<double> proxy;
    for (double T : t_grid) {
        const auto cls = bragg::enumerate_interferometer_class(j, o.a_min, o.a_max, T, sp, weights);
        std::vector<double> ph;
        for (std::size_t i = 0; i < cls.trajectories.size(); ++i)
            if (std::abs(weights[i]) > 0.0) ph.push_back(cls.trajectories[i].phase);
        const int groups = ph.empty() ? 0 : bragg::congruence_groups(ph, 1e-6);
        t.add_row({T, cls.contrast_proxy, static_cast<double>(groups)});
        proxy.push_back(cls.contrast_proxy);
    }
    RunOutput out;
    out.files["class_oracle.csv"] = t.str();
    out.summary = peaks_json(t_grid, proxy, c.fit.peak_threshold, bragg::revival_period(sp));
    out.summary["j"] = j;
    json w = json::array();
    for (std::size_t i = 0; i < weights.size(); ++i)
        w.push_back({{"a", o.a_min + static_cast<int>(i)},
                     {"re", weights[i].real()},
                     {"im", weights[i].imag()}});
    out.summary["weights"] = w;
    return out;
}

RunOutput cmd_gradiometer(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    bragg::GradiometerSpec spec;
    spec.upper_momentum = c.gradiometer.upper_momentum;
    spec.lower_momentum = c.gradiometer.lower_momentum;
    spec.coupling_order = c.gradiometer.coupling_order;
    spec.bvs_separation = c.gradiometer.bvs_separation;
    ExperimentConfig timing = c;
    timing.sequence.order = c.gradiometer.coupling_order;
    timing.sequence.input_site = 0;
    spec.timing = timing.build_sequence(c.sequence.interrogation_time);
    spec.validate(sp);
    const double g = c.tide.mean_gravity;
    const double grad = c.gradiometer.gradient;
    auto opt = scan_options(c, threads);

    auto quiet = bragg::NoiseModel::noiseless();
    quiet.tilt = c.tilt;
    const auto phases = bragg::uniform_phase_grid(c.fit.phase_points, c.fit.phase_periods);
    const auto ref = bragg::run_gradiometer(spec, c.ensemble, g, grad, quiet, phases, opt, sp);
    const auto lower_ref = bragg::FringeResponse::from_scan(ref.lower, c.fit.harmonics);
    const auto upper_ref = bragg::FringeResponse::from_scan(ref.upper, c.fit.harmonics);
    const double laser = c.gradiometer.laser_phase ? *c.gradiometer.laser_phase : lower_ref.bias;
    const auto lower = lower_ref.at(laser);
    const auto upper = upper_ref.at(laser);

    opt.first_shot = phases.size();
    const auto shots = bragg::run_gradiometer_shots(spec, c.ensemble, g, grad, c.noise_model(),
                                                    laser, static_cast<std::size_t>(c.gradiometer.shots),
                                                    opt, sp);
    CsvTable t({"shot", "lower_normalized", "upper_normalized", "lower_phase", "upper_phase",
                "differential_phase", "mirror_phase"});
    std::vector<double> pl, pu, diff;
    for (std::size_t i = 0; i < shots.lower.size(); ++i) {
        const double a = lower.phase_offset(shots.lower[i].normalized);
        const double b = upper.phase_offset(shots.upper[i].normalized);
        const auto& m = shots.lower[i].mirror_phases;
        t.add_row({static_cast<double>(i), shots.lower[i].normalized, shots.upper[i].normalized,
                   a, b, b - a, m[0] - 2.0 * m[1] + m[2]});
        pl.push_back(a);
        pu.push_back(b);
        diff.push_back(b - a);
    }
    auto stats = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double s = 0.0;
        for (double x : v) s += (x - m) * (x - m);
        return std::pair{m, std::sqrt(s / static_cast<double>(v.size() - 1))};
    };
    const auto corr = bragg::gradiometer_correlation(pl, pu);
    const auto [dm, ds] = stats(diff);
    const auto [lm, ls] = stats(pl);
    const auto [um, us] = stats(pu);

    RunOutput out;
    out.files["gradiometer_shots.csv"] = t.str();
    out.files["gradiometer_reference.csv"] = scan_csv(ref.lower) + "\r\n" + scan_csv(ref.upper);
    out.summary["baseline"] = ref.baseline;
    out.summary["laser_phase"] = laser;
    out.summary["lower_fit"] = fit_json(lower.fit);
    out.summary["upper_fit"] = fit_json(upper.fit);
    out.summary["steepest_point_difference"] = upper_ref.bias - lower_ref.bias;
    out.summary["pearson"] = corr.pearson;
    out.summary["differential_phase_mean"] = dm;
    out.summary["differential_phase_sd"] = ds;
    out.summary["lower_phase_sd"] = ls;
    out.summary["upper_phase_sd"] = us;
    out.summary["lower_phase_mean"] = lm;
    out.summary["upper_phase_mean"] = um;
    out.summary["gradient"] = grad;
    return out;
}

RunOutput cmd_gravity_run(const ExperimentConfig& c, int threads)
{
    const auto sp = c.species();
    const auto& r = c.gravity_run;
    const auto seq = c.build_sequence(r.interrogation_time);
    bragg::FringeResponse response;
    if (r.response == "sinusoid") {
        response = bragg::FringeResponse::sinusoid(r.contrast);
    } else {
        auto quiet = bragg::NoiseModel::noiseless();
        quiet.tilt = c.tilt;
        const auto scan = bragg::scan_fringe(
            c.ensemble, seq, c.tide.mean_gravity, quiet,
            bragg::uniform_phase_grid(c.fit.phase_points, c.fit.phase_periods),
            scan_options(c, threads), sp);
        response = bragg::FringeResponse::from_scan(scan, c.fit.harmonics);
    }
    bragg::GravityRunSpec spec;
    spec.shots = static_cast<std::size_t>(r.shots);
    spec.shot_period = r.shot_period;
    spec.sensitivity = r.sensitivity;
    spec.bin_size = static_cast<std::size_t>(r.bin_size);
    spec.allan_per_decade = c.allan.per_decade;
    const auto tide = c.tide_model();
    const auto run =
        bragg::run_gravity_series(spec, response, seq, tide, c.noise_model(), c.seed, sp);

    CsvTable series({"time", "true_gravity", "measured_gravity", "residual", "normalized"});
    for (std::size_t i = 0; i < run.time.size(); ++i)
        series.add_row({run.time[i], run.true_gravity[i], run.measured_gravity[i],
                        run.residual[i], run.normalized[i]});
    CsvTable bins({"time", "mean", "standard_error", "count"});
    for (std::size_t i = 0; i < run.bins.size(); ++i)
        bins.add_row({run.bin_time[i], run.bins[i].mean, run.bins[i].standard_error,
                      static_cast<double>(run.bins[i].count)});
    CsvTable allan({"tau", "deviation"});
    for (std::size_t i = 0; i < run.allan.tau.size(); ++i)
        allan.add_row({run.allan.tau[i], run.allan.deviation[i]});

    double mean_se = 0.0;
    std::size_t defined = 0;
    for (const auto& b : run.bins)
        if (b.error_defined) {
            mean_se += b.standard_error;
            ++defined;
        }
    mean_se = defined ? mean_se / static_cast<double>(defined) : 0.0;

    json comps = json::array();
    for (std::size_t k = 0; k < tide.components.size(); ++k) {
        const auto& inj = tide.components[k];
        comps.push_back({{"injected_amplitude", inj.amplitude},
                         {"injected_phase", inj.phase},
                         {"angular_frequency", inj.angular_frequency},
                         {"recovered_amplitude", run.tide_fit.amplitude[k]},
                         {"recovered_amplitude_error", run.tide_fit.amplitude_error[k]},
                         {"recovered_phase", run.tide_fit.phase[k]},
                         {"binned_amplitude", run.binned_tide_fit.amplitude[k]},
                         {"binned_phase", run.binned_tide_fit.phase[k]},
                         {"amplitude_error", run.tide_fit.amplitude[k] - inj.amplitude}});
    }
    RunOutput out;
    out.files["gravity_series.csv"] = series.str();
    out.files["gravity_bins.csv"] = bins.str();
    out.files["allan.csv"] = allan.str();
    out.summary["tide"] = comps;
    out.summary["recovered_mean_gravity"] = run.tide_fit.offset;
    out.summary["mean_bin_standard_error"] = mean_se;
    out.summary["mirror_phase_rms"] = run.mirror_phase_rms;
    out.summary["detection_phase_noise"] = run.detection_phase_noise;
    out.summary["bias"] = response.bias;
    out.summary["response_fit"] = fit_json(response.fit);
    out.summary["allan"] = {{"tau", run.allan.tau},
                            {"deviation", run.allan.deviation},
                            {"loglog_slope", run.allan.tau.size() >= 2 ? json(run.allan.loglog_slope()) : json(nullptr)}};
    out.summary["sequence"] = sequence_json(seq);
    return out;
}

RunOutput cmd_allan(const ExperimentConfig& c, int)
{
    const auto& a = c.allan;
    const auto series = a.input ? read_csv_column(*a.input, a.column)
                                : bragg::white_gravity_series(a.sensitivity, a.shot_period,
                                                              static_cast<std::size_t>(a.shots), c.seed);
    if (series.size() < 2) throw bragg::ConfigError("allan: need at least two samples");
    const auto tau = a.tau.empty() ? bragg::default_tau_grid(series.size(), a.shot_period, a.per_decade)
                                   : a.tau;
    const auto curve = bragg::allan_deviation(series, a.shot_period, tau);
    CsvTable t({"tau", "deviation"});
    for (std::size_t i = 0; i < curve.tau.size(); ++i) t.add_row({curve.tau[i], curve.deviation[i]});
    RunOutput out;
    out.files["allan.csv"] = t.str();
    out.summary["samples"] = series.size();
    out.summary["tau"] = curve.tau;
    out.summary["deviation"] = curve.deviation;
    out.summary["omitted_tau"] = curve.omitted_tau;
    out.summary["loglog_slope"] = curve.tau.size() >= 2 ? json(curve.loglog_slope()) : json(nullptr);
    return out;
}

RunOutput cmd_calibrate(const ExperimentConfig& c, int)
{
    const auto sp = c.species();
    const int n = std::abs(c.sequence.order);
    const auto peak = bragg::first_lobe_peak(sp, n, c.sequence.rms_width, 0.0, c.evolution);
    const auto seq = c.build_sequence(c.sequence.interrogation_time);
    const double bs = bragg::simulate_transfer(sp, n, c.sequence.rms_width, 0.0,
                                               seq.beamsplitter.peak_rabi, c.evolution);
    const double mi = bragg::simulate_transfer(sp, n, c.sequence.rms_width, 0.0,
                                               seq.mirror.peak_rabi, c.evolution);
    CsvTable t({"pulse", "peak_rabi", "area", "transfer"});
    t.add_row({0.0, seq.beamsplitter.peak_rabi, seq.beamsplitter.area(), bs});
    t.add_row({1.0, seq.mirror.peak_rabi, seq.mirror.area(), mi});
    RunOutput out;
    out.files["calibration.csv"] = t.str();
    out.summary["first_lobe_peak_rabi"] = peak.peak_rabi;
    out.summary["first_lobe_peak_transfer"] = peak.transfer;
    out.summary["beamsplitter_transfer"] = bs;
    out.summary["mirror_transfer"] = mi;
    out.summary["sequence"] = sequence_json(seq);
    out.summary["pulse_index_legend"] = "0 = beamsplitter, 1 = mirror";
    return out;
}

using Handler = RunOutput (*)(const ExperimentConfig&, int);

const std::map<std::string, Handler>& handlers()
{
    static const std::map<std::string, Handler> h{
        {"pulse", cmd_pulse},           {"bvs", cmd_bvs},
        {"fringe", cmd_fringe},         {"revivals", cmd_revivals},
        {"gradiometer", cmd_gradiometer}, {"gravity-run", cmd_gravity_run},
        {"allan", cmd_allan},           {"class-oracle", cmd_class_oracle},
        {"calibrate", cmd_calibrate},
    };
    return h;
}

}  // namespace

const std::vector<std::string>& subcommands()
{
    static const std::vector<std::string> names{"pulse",       "bvs",         "fringe",
                                                "revivals",    "gradiometer", "gravity-run",
                                                "allan",       "class-oracle", "calibrate"};
    return names;
}

RunOutput run_command(const std::string& command, const ExperimentConfig& config, int threads)
{
    validate_for(config, command);
    return handlers().at(command)(config, threads);
}

}  // namespace cli
