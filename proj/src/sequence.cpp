#include "bragg/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "bragg/constants.hpp"
#include "bragg/errors.hpp"
#include "bragg/parallel.hpp"

namespace bragg {

using cplx = std::complex<double>;
using constants::pi;

// ---------------------------------------------------------------------------
// EnsembleSpec / MZISequence

std::vector<double> EnsembleSpec::draw() const
{
    validate();
    if (!explicit_q.empty()) return explicit_q;
    if (sigma_q == 0.0) return {0.0};
    std::mt19937_64 rng = make_rng(seed, 0, RngStream::ensemble);
    std::normal_distribution<double> dist(0.0, sigma_q);
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(sample_count));
    while (static_cast<int>(q.size()) < sample_count) {
        const double v = dist(rng);
        if (std::abs(v) <= 1.0) q.push_back(v);
    }
    return q;
}

void EnsembleSpec::validate() const
{
    if (sample_count < 1) throw std::invalid_argument("ensemble needs at least one sample");
    if (!(sigma_q >= 0.0)) throw std::invalid_argument("sigma_q must be >= 0");
    for (double q : explicit_q)
        if (!(std::abs(q) <= 1.0)) throw std::invalid_argument("explicit quasimomenta must satisfy |q| <= 1");
}

MZISequence MZISequence::calibrated(const AtomSpecies& species, int order,
                                    double interrogation_time, double rms_width,
                                    const EvolutionConfig& cfg, int input_site)
{
    if (order == 0) throw std::invalid_argument("transition order must be non-zero");
    const int n = std::abs(order);
    const TransferSample peak = first_lobe_peak(species, n, rms_width, 0.0, cfg);
    const double half =
        calibrate_pulse_amplitude(species, 0.5 * peak.transfer, n, rms_width, 0.0, cfg);
    MZISequence seq;
    seq.order = order;
    seq.input_site = input_site;
    seq.interrogation_time = interrogation_time;
    seq.mirror = PulseSpec::resonant(species, n, rms_width, peak.peak_rabi);
    seq.beamsplitter = PulseSpec::resonant(species, n, rms_width, half);
    const double delta = transition_frequency(species, input_site, order);
    seq.mirror.frequency_difference = delta;
    seq.beamsplitter.frequency_difference = delta;
    return seq;
}

void MZISequence::validate() const
{
    if (order == 0) throw std::invalid_argument("transition order must be non-zero");
    beamsplitter.validate();
    mirror.validate();
    if (!(beamsplitter.peak_rabi > 0.0 && mirror.peak_rabi > 0.0))
        throw CalibrationError("pulse amplitudes are not calibrated");
    if (beamsplitter.frequency_difference != mirror.frequency_difference ||
        beamsplitter.chirp != mirror.chirp)
        throw std::invalid_argument("beamsplitter and mirror must drive the same transition");
    if (!(interrogation_time > 0.5 * (beamsplitter.duration + mirror.duration)))
        throw std::invalid_argument("interrogation time must exceed the pulse duration");
}

// ---------------------------------------------------------------------------
// ShotEngine

namespace {

struct PulseTimes {
    double bs1 = 0.0;
    double mirror = 0.0;
    double bs2 = 0.0;
    double free = 0.0;  // each dark period
};

PulseTimes pulse_times(const MZISequence& seq)
{
    const double c1 = 0.5 * seq.beamsplitter.duration;
    PulseTimes t;
    t.bs1 = 0.0;
    t.mirror = c1 + seq.interrogation_time - 0.5 * seq.mirror.duration;
    t.bs2 = c1 + 2.0 * seq.interrogation_time - 0.5 * seq.beamsplitter.duration;
    t.free = seq.interrogation_time - 0.5 * (seq.beamsplitter.duration + seq.mirror.duration);
    return t;
}

}  // namespace

struct ShotEngine::Impl {
    AtomSpecies species;
    std::vector<double> qs;
    MZISequence seq;
    double chirp;
    EvolutionConfig cfg;
    int threads;
    int n_lo = 0;
    int n_hi = 0;
    // Rotating-frame pulse matrices at t = 0, kept when there is no chirp.
    std::vector<Eigen::MatrixXcd> rot_bs;
    std::vector<Eigen::MatrixXcd> rot_mirror;
    std::vector<std::array<LadderPropagator, 3>> props;

    Impl(const AtomSpecies& sp, std::vector<double> q, MZISequence s, double c,
         const EvolutionConfig& e, int th)
        : species(sp), qs(std::move(q)), seq(std::move(s)), chirp(c), cfg(e), threads(th)
    {
        seq.validate();
        cfg.validate();
        if (qs.empty()) throw std::invalid_argument("ensemble is empty");
        const int guard = cfg.ladder_guard_sites;
        n_lo = std::min(seq.input_site, seq.output_site()) - guard;
        n_hi = std::max(seq.input_site, seq.output_site()) + guard;
        seq.beamsplitter.chirp = chirp;
        seq.mirror.chirp = chirp;
        if (chirp == 0.0) {
            rot_bs.resize(qs.size());
            rot_mirror.resize(qs.size());
            parallel_for(qs.size(), threads, [&](std::size_t i) {
                rot_bs[i] = pulse_propagator(species, n_lo, n_hi, qs[i], seq.beamsplitter, 0.0, cfg)
                                .rotating_frame();
                rot_mirror[i] = pulse_propagator(species, n_lo, n_hi, qs[i], seq.mirror, 0.0, cfg)
                                    .rotating_frame();
            });
        }
        rebuild();
    }

    LadderPropagator shifted(const Eigen::MatrixXcd& rot, const PulseSpec& p, double t0) const
    {
        const double t1 = t0 + p.duration;
        return LadderPropagator(n_lo, rot, p.frequency_difference * t0,
                                p.frequency_difference * t1, p.laser_phase, t0, t1);
    }

    void rebuild()
    {
        seq.validate();
        const PulseTimes t = pulse_times(seq);
        props.clear();
        props.reserve(qs.size());
        if (chirp == 0.0) {
            for (std::size_t i = 0; i < qs.size(); ++i) {
                props.push_back({shifted(rot_bs[i], seq.beamsplitter, t.bs1),
                                 shifted(rot_mirror[i], seq.mirror, t.mirror),
                                 shifted(rot_bs[i], seq.beamsplitter, t.bs2)});
            }
            return;
        }
        std::vector<std::optional<std::array<LadderPropagator, 3>>> tmp(qs.size());
        parallel_for(qs.size(), threads, [&](std::size_t i) {
            tmp[i].emplace(std::array<LadderPropagator, 3>{
                pulse_propagator(species, n_lo, n_hi, qs[i], seq.beamsplitter, t.bs1, cfg),
                pulse_propagator(species, n_lo, n_hi, qs[i], seq.mirror, t.mirror, cfg),
                pulse_propagator(species, n_lo, n_hi, qs[i], seq.beamsplitter, t.bs2, cfg)});
        });
        for (auto& p : tmp) props.push_back(std::move(*p));
    }

    // Dark-period phase and, when classes are resolved, the label shift.
    void dark_period(Eigen::MatrixXcd& m, int live_cols, double q, double duration,
                     bool resolve) const
    {
        const int size = n_hi - n_lo + 1;
        const double wr = species.recoil_frequency();
        for (int i = 0; i < size; ++i) {
            const double x = (n_lo + i) + 0.5 * q;
            const cplx ph = std::polar(1.0, -4.0 * wr * x * x * duration);
            if (!resolve) {
                m.row(i).head(live_cols) *= ph;
                continue;
            }
            // Shift this site's labels up by i; columns above live_cols are zero.
            for (int j = live_cols - 1; j >= 0; --j) {
                m(i, j + i) = m(i, j) * ph;
                if (i > 0) m(i, j) = 0.0;
            }
        }
    }

    std::vector<double> one_sample(std::size_t k, const std::array<double, 3>& extra) const
    {
        const int size = n_hi - n_lo + 1;
        const bool resolve = seq.coherence == Coherence::class_resolved;
        const int labels = resolve ? 2 * size - 1 : 1;
        const double free = pulse_times(seq).free;
        Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size, labels);
        m(seq.input_site - n_lo, 0) = 1.0;

        props[k][0].apply(m.leftCols(1), extra[0]);
        dark_period(m, 1, qs[k], free, resolve);
        const int live = resolve ? size : 1;
        props[k][1].apply(m.leftCols(live), extra[1]);
        dark_period(m, live, qs[k], free, resolve);
        props[k][2].apply(m, extra[2]);

        std::vector<double> pops(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) pops[i] = m.row(i).squaredNorm();
        const double edge = pops[0] + pops[1] + pops[size - 1] + pops[size - 2];
        if (edge > cfg.leakage_limit) {
            std::ostringstream msg;
            msg << "ladder truncation in interferometer: edge population " << edge << " at q = "
                << qs[k] << "; increase ladder_guard_sites";
            throw TruncationError(msg.str(), edge);
        }
        return pops;
    }

    std::map<int, double> evaluate(const std::array<double, 3>& extra) const
    {
        const int size = n_hi - n_lo + 1;
        std::vector<double> sum(static_cast<std::size_t>(size), 0.0);
        for (std::size_t k = 0; k < qs.size(); ++k) {
            const std::vector<double> p = one_sample(k, extra);
            for (int i = 0; i < size; ++i) sum[i] += p[i];
        }
        std::map<int, double> out;
        for (int i = 0; i < size; ++i) out[n_lo + i] = sum[i] / static_cast<double>(qs.size());
        return out;
    }
};

ShotEngine::ShotEngine(const AtomSpecies& species, std::vector<double> q_samples, MZISequence seq,
                       double chirp, const EvolutionConfig& cfg, int threads)
    : impl_(std::make_unique<Impl>(species, std::move(q_samples), std::move(seq), chirp, cfg,
                                   threads))
{
}

ShotEngine::~ShotEngine() = default;
ShotEngine::ShotEngine(ShotEngine&&) noexcept = default;
ShotEngine& ShotEngine::operator=(ShotEngine&&) noexcept = default;

const MZISequence& ShotEngine::sequence() const noexcept { return impl_->seq; }

void ShotEngine::set_interrogation_time(double t)
{
    impl_->seq.interrogation_time = t;
    impl_->rebuild();
}

std::map<int, double> ShotEngine::populations(const std::array<double, 3>& extra) const
{
    return impl_->evaluate(extra);
}

std::vector<std::map<int, double>> ShotEngine::populations(
    const std::vector<std::array<double, 3>>& extra) const
{
    std::vector<std::map<int, double>> out(extra.size());
    parallel_for(extra.size(), impl_->threads,
                 [&](std::size_t i) { out[i] = impl_->evaluate(extra[i]); });
    return out;
}

// ---------------------------------------------------------------------------
// Shots

double residual_chirp(const AtomSpecies& species, const MZISequence& seq, double gravity,
                      double cos_tilt)
{
    if (!seq.sweep_rate) return 0.0;
    const double k_eff = 2.0 * species.wavevector();
    return k_eff * gravity * cos_tilt / (2.0 * pi) - *seq.sweep_rate;
}

ShotResult finish_shot(const std::map<int, double>& clean, const MZISequence& seq,
                       const std::array<double, 3>& mirror, const NoiseModel& noise,
                       std::mt19937_64& detection_rng)
{
    ShotResult r;
    r.populations = clean;
    r.mirror_phases = mirror;
    const double p_in = clean.at(seq.input_site);
    const double p_out = clean.at(seq.output_site());
    r.ideal_normalized = (p_in + p_out) > 0.0 ? p_in / (p_in + p_out) : 0.5;
    const std::vector<double> noisy = apply_detection_noise({p_in, p_out}, noise, detection_rng);
    r.detection_noise = {noisy[0] - p_in, noisy[1] - p_out};
    r.populations[seq.input_site] = noisy[0];
    r.populations[seq.output_site()] = noisy[1];
    if (!(noisy[0] + noisy[1] > 0.0))
        throw NumericalError("both interferometer ports are empty after detection noise");
    r.normalized = noisy[0] / (noisy[0] + noisy[1]);
    return r;
}

namespace {

std::array<double, 3> shot_phases(const std::array<double, 3>& mirror, double final_phase)
{
    return {mirror[0], mirror[1], mirror[2] + final_phase};
}

// Engines keyed by residual chirp; a drifting tilt with a fixed sweep rate
// makes every shot distinct.
class EngineCache {
public:
    EngineCache(const AtomSpecies& sp, std::vector<double> qs, const MZISequence& seq,
                const EvolutionConfig& cfg, int threads)
        : sp_(sp), qs_(std::move(qs)), seq_(seq), cfg_(cfg), threads_(threads)
    {
    }

    const ShotEngine& get(double chirp)
    {
        auto it = engines_.find(chirp);
        if (it == engines_.end())
            it = engines_.emplace(chirp, ShotEngine(sp_, qs_, seq_, chirp, cfg_, threads_)).first;
        return it->second;
    }

private:
    AtomSpecies sp_;
    std::vector<double> qs_;
    MZISequence seq_;
    EvolutionConfig cfg_;
    int threads_;
    std::map<double, ShotEngine> engines_;
};

struct PlannedShot {
    double chirp;
    std::array<double, 3> mirror;
    std::array<double, 3> phases;
};

// Evaluates planned shots grouped by chirp, keeping input order.
std::vector<std::map<int, double>> evaluate_planned(EngineCache& cache,
                                                    const std::vector<PlannedShot>& plan)
{
    std::vector<std::map<int, double>> out(plan.size());
    std::map<double, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < plan.size(); ++i) groups[plan[i].chirp].push_back(i);
    for (const auto& [chirp, idx] : groups) {
        std::vector<std::array<double, 3>> phases;
        for (std::size_t i : idx) phases.push_back(plan[i].phases);
        const auto pops = cache.get(chirp).populations(phases);
        for (std::size_t k = 0; k < idx.size(); ++k) out[idx[k]] = pops[k];
    }
    return out;
}

void append_shot(FringeScan& scan, const ShotResult& r)
{
    for (const auto& [site, p] : r.populations) scan.ports[site].push_back(p);
    scan.normalized.push_back(r.normalized);
}

}  // namespace

ShotResult run_shot(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                    const NoiseModel& noise, const ShotContext& ctx, const AtomSpecies& species,
                    const EvolutionConfig& cfg)
{
    noise.validate();
    const double chirp =
        residual_chirp(species, seq, gravity, tilt_projection_drift(noise, ctx.time));
    const ShotEngine engine(species, ens.draw(), seq, chirp, cfg, 1);
    std::mt19937_64 mirror_rng = make_rng(ctx.master_seed, ctx.shot_index, RngStream::mirror);
    std::mt19937_64 det_rng =
        make_rng(ctx.master_seed, ctx.shot_index, RngStream::detection_lower);
    const std::array<double, 3> mirror = sample_mirror_phases(noise, mirror_rng);
    return finish_shot(engine.populations(shot_phases(mirror, seq.final_phase)), seq, mirror,
                       noise, det_rng);
}

std::vector<double> uniform_phase_grid(int points, double periods)
{
    if (points < 1) throw std::invalid_argument("phase grid needs at least one point");
    if (!(periods > 0.0)) throw std::invalid_argument("phase grid must span a positive range");
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) g[i] = 2.0 * pi * periods * i / points;
    return g;
}

namespace {

void check_grid(const std::vector<double>& grid)
{
    if (grid.empty()) throw std::invalid_argument("scan grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw std::invalid_argument("scan grid must be strictly increasing");
}

ScanMetadata metadata(const MZISequence& seq, const ScanOptions& opt, const char* control)
{
    ScanMetadata m;
    m.interrogation_time = seq.interrogation_time;
    m.order = seq.order;
    m.input_site = seq.input_site;
    m.seed = opt.master_seed;
    m.control = control;
    return m;
}

}  // namespace

FringeScan scan_fringe(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                       const NoiseModel& noise, const std::vector<double>& phase_grid,
                       const ScanOptions& opt, const AtomSpecies& species)
{
    check_grid(phase_grid);
    noise.validate();
    EngineCache cache(species, ens.draw(), seq, opt.evolution, opt.threads);
    std::vector<PlannedShot> plan;
    for (std::size_t i = 0; i < phase_grid.size(); ++i) {
        const std::uint64_t shot = opt.first_shot + i;
        const double t = opt.shot_period * static_cast<double>(i);
        std::mt19937_64 rng = make_rng(opt.master_seed, shot, RngStream::mirror);
        const auto mirror = sample_mirror_phases(noise, rng);
        const double chirp =
            residual_chirp(species, seq, gravity, tilt_projection_drift(noise, t));
        plan.push_back({chirp, mirror, shot_phases(mirror, seq.final_phase + phase_grid[i])});
    }
    const auto pops = evaluate_planned(cache, plan);

    FringeScan scan;
    scan.meta = metadata(seq, opt, "laser_phase");
    scan.phase = phase_grid;
    scan.control = phase_grid;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        std::mt19937_64 det =
            make_rng(opt.master_seed, opt.first_shot + i, RngStream::detection_lower);
        append_shot(scan, finish_shot(pops[i], seq, plan[i].mirror, noise, det));
    }
    return scan;
}

FringeScan scan_sweep_rate(const EnsembleSpec& ens, const MZISequence& seq, double gravity,
                           const NoiseModel& noise, const std::vector<double>& sweep_rates,
                           const ScanOptions& opt, const AtomSpecies& species)
{
    if (sweep_rates.empty()) throw std::invalid_argument("scan grid is empty");
    noise.validate();
    const double t2 = seq.interrogation_time * seq.interrogation_time;
    EngineCache cache(species, ens.draw(), seq, opt.evolution, opt.threads);
    std::vector<PlannedShot> plan;
    std::vector<double> equiv;
    for (std::size_t i = 0; i < sweep_rates.size(); ++i) {
        MZISequence s = seq;
        s.sweep_rate = sweep_rates[i];
        const double t = opt.shot_period * static_cast<double>(i);
        const double chirp = residual_chirp(species, s, gravity, tilt_projection_drift(noise, t));
        std::mt19937_64 rng = make_rng(opt.master_seed, opt.first_shot + i, RngStream::mirror);
        const auto mirror = sample_mirror_phases(noise, rng);
        plan.push_back({chirp, mirror, shot_phases(mirror, seq.final_phase)});
        equiv.push_back(2.0 * pi * chirp * t2);
    }
    const auto pops = evaluate_planned(cache, plan);

    std::vector<std::size_t> order(plan.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return equiv[a] < equiv[b]; });
    FringeScan scan;
    scan.meta = metadata(seq, opt, "sweep_rate");
    for (std::size_t i : order) {
        scan.phase.push_back(equiv[i]);
        scan.control.push_back(sweep_rates[i]);
        std::mt19937_64 det =
            make_rng(opt.master_seed, opt.first_shot + i, RngStream::detection_lower);
        append_shot(scan, finish_shot(pops[i], seq, plan[i].mirror, noise, det));
    }
    check_grid(scan.phase);
    return scan;
}

std::vector<ContrastPoint> scan_contrast_vs_t(const EnsembleSpec& ens, const MZISequence& seq,
                                              const std::vector<double>& t_grid, double gravity,
                                              const NoiseModel& noise,
                                              const std::vector<double>& phase_grid,
                                              int harmonics, const ScanOptions& opt,
                                              const AtomSpecies& species)
{
    check_grid(t_grid);
    check_grid(phase_grid);
    noise.validate();
    const double limit = revival_period(species) / 8.0;
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (t_grid[i] - t_grid[i - 1] > limit * (1.0 + 1e-9))
            throw std::invalid_argument("interrogation-time step exceeds a revival period / 8");

    const double chirp =
        residual_chirp(species, seq, gravity, tilt_projection_drift(noise, 0.0));
    MZISequence first = seq;
    first.interrogation_time = t_grid.front();
    ShotEngine engine(species, ens.draw(), first, chirp, opt.evolution, opt.threads);

    std::vector<ContrastPoint> out;
    std::uint64_t shot = opt.first_shot;
    for (double t : t_grid) {
        engine.set_interrogation_time(t);
        std::vector<std::array<double, 3>> phases;
        std::vector<std::array<double, 3>> mirrors;
        for (std::size_t i = 0; i < phase_grid.size(); ++i) {
            std::mt19937_64 rng = make_rng(opt.master_seed, shot + i, RngStream::mirror);
            mirrors.push_back(sample_mirror_phases(noise, rng));
            phases.push_back(shot_phases(mirrors.back(), seq.final_phase + phase_grid[i]));
        }
        const auto pops = engine.populations(phases);
        std::vector<double> norm;
        for (std::size_t i = 0; i < pops.size(); ++i) {
            std::mt19937_64 det = make_rng(opt.master_seed, shot + i, RngStream::detection_lower);
            norm.push_back(finish_shot(pops[i], engine.sequence(), mirrors[i], noise, det).normalized);
        }
        shot += phase_grid.size();
        ContrastPoint cp;
        cp.interrogation_time = t;
        cp.fit = fit_harmonics(phase_grid, norm, harmonics);
        cp.contrast = fringe_contrast(cp.fit).value;
        out.push_back(std::move(cp));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gradiometer

double GradiometerSpec::baseline(const AtomSpecies& species) const
{
    return upper_momentum * species.recoil_velocity() * bvs_separation;
}

namespace {

int momentum_site(double p)
{
    const double half = p / 2.0;
    if (std::abs(half - std::round(half)) > 1e-9)
        throw ConfigError("cloud momenta must be even multiples of hbar k");
    return static_cast<int>(std::lround(half));
}

}  // namespace

int GradiometerSpec::upper_site() const { return momentum_site(upper_momentum); }
int GradiometerSpec::lower_site() const { return momentum_site(lower_momentum); }

MZISequence GradiometerSpec::lower_sequence(const AtomSpecies& species) const
{
    MZISequence s = timing;
    s.order = coupling_order;
    s.input_site = lower_site();
    const double delta = transition_frequency(species, s.input_site, s.order);
    s.beamsplitter.frequency_difference = delta;
    s.mirror.frequency_difference = delta;
    return s;
}

MZISequence GradiometerSpec::upper_sequence(const AtomSpecies& species) const
{
    MZISequence s = timing;
    s.order = -coupling_order;
    s.input_site = upper_site();
    const double delta = transition_frequency(species, s.input_site, s.order);
    s.beamsplitter.frequency_difference = delta;
    s.mirror.frequency_difference = delta;
    return s;
}

void GradiometerSpec::validate(const AtomSpecies& species) const
{
    if (coupling_order < 1) throw ConfigError("gradiometer coupling order must be >= 1");
    if (!(upper_momentum > lower_momentum))
        throw ConfigError("upper cloud momentum must exceed the lower one");
    if (!(bvs_separation >= 0.0)) throw ConfigError("BVS separation must be >= 0");
    const int su = upper_site();
    const int sl = lower_site();
    const double f_low = transition_frequency(species, sl, coupling_order);
    const double f_up = transition_frequency(species, su, -coupling_order);
    const double width = 2.0 / timing.beamsplitter.rms_width;
    if (std::abs(f_low - f_up) <= width) return;  // one frequency pair drives both clouds
    const double spacing = 4.0 * species.recoil_frequency();
    auto check = [&](double f, int site, const char* which) {
        const double m = f / spacing - 2.0 * site;
        const long nearest = std::lround(m);
        if (nearest != 0 && std::abs(nearest) <= 2 * coupling_order &&
            std::abs(m - nearest) * spacing <= width) {
            std::ostringstream msg;
            msg << "overlapping Bragg resonances: the " << which << " cloud sees an order "
                << nearest << " transition within the pulse bandwidth";
            throw ConfigError(msg.str());
        }
    };
    check(f_up, sl, "lower");
    check(f_low, su, "upper");
}

namespace {

struct CloudPlan {
    MZISequence seq;
    double gravity;
};

std::array<CloudPlan, 2> plan_clouds(const GradiometerSpec& spec, double gravity, double gradient,
                                     const AtomSpecies& species)
{
    spec.validate(species);
    const double base = spec.baseline(species);
    CloudPlan lo{spec.lower_sequence(species), gravity};
    CloudPlan up{spec.upper_sequence(species), gravity + gradient * base};
    if (!spec.timing.sweep_rate) {
        const double alpha = 2.0 * species.wavevector() * gravity / (2.0 * pi);
        lo.seq.sweep_rate = alpha;
        up.seq.sweep_rate = alpha;
    }
    return {lo, up};
}

}  // namespace

GradiometerScan run_gradiometer(const GradiometerSpec& spec, const EnsembleSpec& ens,
                                double gravity, double gradient, const NoiseModel& noise,
                                const std::vector<double>& phase_grid, const ScanOptions& opt,
                                const AtomSpecies& species)
{
    check_grid(phase_grid);
    noise.validate();
    const auto clouds = plan_clouds(spec, gravity, gradient, species);
    const std::vector<double> qs = ens.draw();
    GradiometerScan out;
    out.baseline = spec.baseline(species);
    for (int c = 0; c < 2; ++c) {
        const MZISequence& seq = clouds[c].seq;
        EngineCache cache(species, qs, seq, opt.evolution, opt.threads);
        std::vector<PlannedShot> plan;
        for (std::size_t i = 0; i < phase_grid.size(); ++i) {
            std::mt19937_64 rng = make_rng(opt.master_seed, opt.first_shot + i, RngStream::mirror);
            const auto mirror = sample_mirror_phases(noise, rng);
            const double t = opt.shot_period * static_cast<double>(i);
            const double chirp = residual_chirp(species, seq, clouds[c].gravity,
                                                tilt_projection_drift(noise, t));
            plan.push_back({chirp, mirror, shot_phases(mirror, seq.final_phase + phase_grid[i])});
        }
        const auto pops = evaluate_planned(cache, plan);
        FringeScan& scan = c == 0 ? out.lower : out.upper;
        scan.meta = metadata(seq, opt, "laser_phase");
        scan.phase = phase_grid;
        scan.control = phase_grid;
        const RngStream stream = c == 0 ? RngStream::detection_lower : RngStream::detection_upper;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            std::mt19937_64 det = make_rng(opt.master_seed, opt.first_shot + i, stream);
            append_shot(scan, finish_shot(pops[i], seq, plan[i].mirror, noise, det));
        }
    }
    return out;
}

GradiometerShots run_gradiometer_shots(const GradiometerSpec& spec, const EnsembleSpec& ens,
                                       double gravity, double gradient, const NoiseModel& noise,
                                       double laser_phase, std::size_t shots,
                                       const ScanOptions& opt, const AtomSpecies& species)
{
    noise.validate();
    const auto clouds = plan_clouds(spec, gravity, gradient, species);
    const std::vector<double> qs = ens.draw();
    GradiometerShots out;
    out.baseline = spec.baseline(species);
    for (int c = 0; c < 2; ++c) {
        const MZISequence& seq = clouds[c].seq;
        EngineCache cache(species, qs, seq, opt.evolution, opt.threads);
        std::vector<PlannedShot> plan;
        for (std::size_t i = 0; i < shots; ++i) {
            std::mt19937_64 rng = make_rng(opt.master_seed, opt.first_shot + i, RngStream::mirror);
            const auto mirror = sample_mirror_phases(noise, rng);
            const double t = opt.shot_period * static_cast<double>(i);
            const double chirp = residual_chirp(species, seq, clouds[c].gravity,
                                                tilt_projection_drift(noise, t));
            plan.push_back({chirp, mirror, shot_phases(mirror, seq.final_phase + laser_phase)});
        }
        const auto pops = evaluate_planned(cache, plan);
        auto& dest = c == 0 ? out.lower : out.upper;
        const RngStream stream = c == 0 ? RngStream::detection_lower : RngStream::detection_upper;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            std::mt19937_64 det = make_rng(opt.master_seed, opt.first_shot + i, stream);
            dest.push_back(finish_shot(pops[i], seq, plan[i].mirror, noise, det));
        }
    }
    return out;
}


std::vector<std::complex<double>> class_path_weights(const AtomSpecies& species,
                                                     const MZISequence& seq, int j, int a_min,
                                                     int a_max, int port,
                                                     const EvolutionConfig& cfg)
{
    seq.validate();
    if (a_max < a_min) throw std::invalid_argument("empty trajectory range");
    const int guard = cfg.ladder_guard_sites;
    const int lo = std::min(seq.input_site, seq.output_site()) - guard;
    const int hi = std::max(seq.input_site, seq.output_site()) + guard;
    const double wr = species.recoil_frequency();
    auto centred = [&](const PulseSpec& p) {
        const Eigen::MatrixXcd u = pulse_propagator(species, lo, hi, 0.0, p, 0.0, cfg).unitary();
        Eigen::VectorXcd half(hi - lo + 1);
        for (int i = 0; i <= hi - lo; ++i) {
            const double n = lo + i;
            half[i] = std::polar(1.0, 4.0 * wr * n * n * 0.5 * p.duration);
        }
        return Eigen::MatrixXcd(half.asDiagonal() * u * half.asDiagonal());
    };
    const Eigen::MatrixXcd bs = centred(seq.beamsplitter);
    const Eigen::MatrixXcd mirror = centred(seq.mirror);
    auto inside = [&](int n) { return n >= lo && n <= hi; };

    std::vector<std::complex<double>> w;
    for (int a = a_min; a <= a_max; ++a) {
        const int b = j - a;
        if (!inside(a) || !inside(b) || !inside(port)) {
            w.emplace_back(0.0);
            continue;
        }
        const cplx amp = bs(port - lo, b - lo) * mirror(b - lo, a - lo) *
                         bs(a - lo, seq.input_site - lo);
        w.push_back(std::conj(amp));
    }
    return w;
}

}  // namespace bragg
