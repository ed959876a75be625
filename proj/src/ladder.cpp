#include "bragg/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bragg/constants.hpp"
#include "bragg/errors.hpp"

namespace bragg {

using cplx = std::complex<double>;
using constants::pi;

// ---------------------------------------------------------------------------
// MomentumLadderState

MomentumLadderState::MomentumLadderState(AtomSpecies species, int n_min, int n_max,
                                         double q_hbar_k, double time)
    : species_(species), n_min_(n_min), q_(q_hbar_k), time_(time)
{
    if (n_max < n_min) throw std::invalid_argument("empty ladder window");
    if (!(std::abs(q_hbar_k) <= 1.0 + 1e-12))
        throw std::invalid_argument("quasimomentum must satisfy |q| <= hbar k");
    amps_ = Eigen::VectorXcd::Zero(n_max - n_min + 1);
}

MomentumLadderState MomentumLadderState::plane_wave(const AtomSpecies& species, int site,
                                                    double q_hbar_k, int guard_sites)
{
    MomentumLadderState s(species, site - guard_sites, site + guard_sites, q_hbar_k);
    s.set_amplitude(site, 1.0);
    return s;
}

MomentumLadderState MomentumLadderState::from_momentum(const AtomSpecies& species,
                                                       double p_hbar_k, int half_window)
{
    const int site = static_cast<int>(std::lround(p_hbar_k / 2.0));
    const double q = p_hbar_k - 2.0 * site;
    return plane_wave(species, site, q, half_window);
}

double MomentumLadderState::quasimomentum() const noexcept
{
    return q_ * constants::hbar * species_.wavevector();
}

std::complex<double> MomentumLadderState::amplitude(int site) const
{
    if (!contains(site)) return 0.0;
    return amps_[site - n_min_];
}

void MomentumLadderState::set_amplitude(int site, std::complex<double> value)
{
    if (!contains(site)) throw std::out_of_range("ladder site outside window");
    amps_[site - n_min_] = value;
}

double MomentumLadderState::population(int site) const { return std::norm(amplitude(site)); }

double MomentumLadderState::edge_population(int edge_sites) const noexcept
{
    const int n = size();
    const int k = std::min(edge_sites, (n + 1) / 2);
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
        sum += std::norm(amps_[i]);
        if (n - 1 - i != i) sum += std::norm(amps_[n - 1 - i]);
    }
    return sum;
}

double MomentumLadderState::mean_momentum() const noexcept
{
    double p = 0.0;
    double w = 0.0;
    for (int i = 0; i < size(); ++i) {
        const double pop = std::norm(amps_[i]);
        p += pop * (2.0 * (n_min_ + i) + q_);
        w += pop;
    }
    return w > 0.0 ? p / w : 0.0;
}

MomentumLadderState MomentumLadderState::reindexed(int site) const
{
    MomentumLadderState out = *this;
    out.n_min_ = n_min_ - site;
    return out;
}

MomentumLadderState MomentumLadderState::widened(int extra) const
{
    if (extra < 0) throw std::invalid_argument("window can only be widened");
    MomentumLadderState out(species_, n_min() - extra, n_max() + extra, q_, time_);
    out.amps_.segment(extra, size()) = amps_;
    return out;
}

// ---------------------------------------------------------------------------
// PulseSpec / EvolutionConfig

PulseSpec PulseSpec::resonant(const AtomSpecies& species, int order, double rms_width,
                              double peak_rabi, double laser_phase, double half_width_sigmas)
{
    PulseSpec p;
    p.rms_width = rms_width;
    p.duration = 2.0 * half_width_sigmas * rms_width;
    p.peak_rabi = peak_rabi;
    p.frequency_difference = bragg_resonance(order, species);
    p.laser_phase = laser_phase;
    return p;
}

double PulseSpec::envelope(double time_from_center) const noexcept
{
    if (std::abs(time_from_center) > 0.5 * duration) return 0.0;
    const double x = time_from_center / rms_width;
    return peak_rabi * std::exp(-0.5 * x * x);
}

double PulseSpec::area() const noexcept
{
    return peak_rabi * rms_width * std::sqrt(2.0 * pi) *
           std::erf(duration / (2.0 * std::sqrt(2.0) * rms_width));
}

void PulseSpec::validate() const
{
    if (!(rms_width > 0.0)) throw std::invalid_argument("pulse rms width must be positive");
    if (!(duration >= 6.0 * rms_width * (1.0 - 1e-12)))
        throw std::invalid_argument("pulse must be truncated no earlier than +-3 sigma");
    if (!(peak_rabi >= 0.0)) throw std::invalid_argument("peak Rabi frequency must be >= 0");
}

void EvolutionConfig::validate() const
{
    if (!(max_step > 0.0)) throw std::invalid_argument("max_step must be positive");
    if (!(error_tolerance > 0.0 && error_tolerance <= 1e-3))
        throw std::invalid_argument("error tolerance must lie in (0, 1e-3]");
    if (ladder_guard_sites < 4) throw std::invalid_argument("need at least 4 guard sites");
    if (!(leakage_limit > 0.0)) throw std::invalid_argument("leakage limit must be positive");
}

// ---------------------------------------------------------------------------
// LadderPropagator

LadderPropagator::LadderPropagator(int n_min, Eigen::MatrixXcd rotating,
                                   double lattice_phase_start, double lattice_phase_end,
                                   double laser_phase, double t_start, double t_end)
    : n_min_(n_min),
      rotating_(std::move(rotating)),
      theta_start_(lattice_phase_start),
      theta_end_(lattice_phase_end),
      laser_phase_(laser_phase),
      t_start_(t_start),
      t_end_(t_end)
{
}

namespace {

// Diagonal gauge factors exp(i * sign * n * angle) over the window.
Eigen::VectorXcd gauge(int n_min, int size, double angle, double sign)
{
    Eigen::VectorXcd g(size);
    for (int i = 0; i < size; ++i) {
        const double n = n_min + i;
        g[i] = std::polar(1.0, sign * n * angle);
    }
    return g;
}

}  // namespace

Eigen::MatrixXcd LadderPropagator::unitary(double extra_phase) const
{
    const double phi = laser_phase_ + extra_phase;
    const Eigen::VectorXcd left = gauge(n_min_, size(), theta_end_ + phi, -1.0);
    const Eigen::VectorXcd right = gauge(n_min_, size(), theta_start_ + phi, +1.0);
    return left.asDiagonal() * rotating_ * right.asDiagonal();
}

void LadderPropagator::apply(Eigen::Ref<Eigen::MatrixXcd> columns, double extra_phase) const
{
    if (columns.rows() != size()) throw std::invalid_argument("propagator window mismatch");
    const double phi = laser_phase_ + extra_phase;
    const Eigen::VectorXcd left = gauge(n_min_, size(), theta_end_ + phi, -1.0);
    const Eigen::VectorXcd right = gauge(n_min_, size(), theta_start_ + phi, +1.0);
    Eigen::MatrixXcd tmp = rotating_ * (right.asDiagonal() * columns);
    columns = left.asDiagonal() * tmp;
}

// ---------------------------------------------------------------------------
// Integrator

namespace {

// Commutator-free fourth-order Magnus scheme: two exponentials of linear
// combinations of H at the Gauss-Legendre nodes.
const double kGaussLo = 0.5 - std::sqrt(3.0) / 6.0;
const double kGaussHi = 0.5 + std::sqrt(3.0) / 6.0;
const double kWeightA = (3.0 - 2.0 * std::sqrt(3.0)) / 12.0;
const double kWeightB = (3.0 + 2.0 * std::sqrt(3.0)) / 12.0;

class TridiagonalHamiltonian {
public:
    TridiagonalHamiltonian(const AtomSpecies& species, int n_min, int size, double q_hbar_k,
                           const LatticeDrive& drive)
        : drive_(drive), kinetic_(size), site_(size)
    {
        const double wr = species.recoil_frequency();
        for (int i = 0; i < size; ++i) {
            const double n = n_min + i;
            const double x = n + 0.5 * q_hbar_k;
            kinetic_[i] = 4.0 * wr * x * x;
            site_[i] = n;
        }
    }

    void evaluate(double t, Eigen::VectorXd& diag, Eigen::VectorXd& off) const
    {
        const double rate = drive_.phase_rate ? drive_.phase_rate(t) : 0.0;
        const double rabi = drive_.rabi ? drive_.rabi(t) : 0.0;
        diag = kinetic_ - rate * site_;
        off.setConstant(kinetic_.size() - 1, 0.5 * rabi);
    }

    int size() const { return static_cast<int>(kinetic_.size()); }

private:
    const LatticeDrive& drive_;
    Eigen::VectorXd kinetic_;
    Eigen::VectorXd site_;
};

// exp(-i h H) for real symmetric tridiagonal H.
Eigen::MatrixXcd expm_tridiagonal(const Eigen::VectorXd& diag, const Eigen::VectorXd& off,
                                  double h)
{
    const Eigen::Index n = diag.size();
    if (n == 1) {
        Eigen::MatrixXcd u(1, 1);
        u(0, 0) = std::polar(1.0, -h * diag[0]);
        return u;
    }
    // The tridiagonal QR in Eigen does not rescale its input and can stall
    // on rad/s-sized entries.
    const double scale = std::max(diag.cwiseAbs().maxCoeff(), off.cwiseAbs().maxCoeff());
    if (scale == 0.0) return Eigen::MatrixXcd::Identity(n, n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag / scale, off / scale, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success) throw NumericalError("tridiagonal eigensolver failed");
    const Eigen::MatrixXd& v = es.eigenvectors();
    const Eigen::ArrayXd arg = -h * scale * es.eigenvalues().array();
    const Eigen::MatrixXd vc = v * arg.cos().matrix().asDiagonal();
    const Eigen::MatrixXd vs = v * arg.sin().matrix().asDiagonal();
    Eigen::MatrixXcd u(n, n);
    u.real() = vc * v.transpose();
    u.imag() = vs * v.transpose();
    return u;
}

class MagnusStepper {
public:
    explicit MagnusStepper(const TridiagonalHamiltonian& ham)
        : ham_(ham),
          d1_(ham.size()),
          d2_(ham.size()),
          o1_(ham.size() - 1),
          o2_(ham.size() - 1)
    {
    }

    Eigen::MatrixXcd step(double t, double h)
    {
        ham_.evaluate(t + kGaussLo * h, d1_, o1_);
        ham_.evaluate(t + kGaussHi * h, d2_, o2_);
        const Eigen::MatrixXcd first =
            expm_tridiagonal(kWeightB * d1_ + kWeightA * d2_, kWeightB * o1_ + kWeightA * o2_, h);
        const Eigen::MatrixXcd second =
            expm_tridiagonal(kWeightA * d1_ + kWeightB * d2_, kWeightA * o1_ + kWeightB * o2_, h);
        return second * first;
    }

private:
    const TridiagonalHamiltonian& ham_;
    Eigen::VectorXd d1_, d2_, o1_, o2_;
};

// Local errors below this are rounding noise of the eigen-decomposition.
constexpr double kRoundoffFloor = 1e-13;

// Adaptive step-doubling integration of one smooth segment.
void integrate_segment(MagnusStepper& stepper, double t0, double t1, double total_span,
                       double& h, const EvolutionConfig& cfg, Eigen::MatrixXcd& u)
{
    const double span = t1 - t0;
    if (span <= 0.0) return;
    const double h_min = std::max(span * 1e-12, 1e-18);
    double t = t0;
    h = std::min({h, cfg.max_step, span});
    while (t < t1) {
        const bool last = (t1 - t) <= h * (1.0 + 1e-12);
        const double step = last ? t1 - t : h;
        const Eigen::MatrixXcd big = stepper.step(t, step);
        const Eigen::MatrixXcd half =
            stepper.step(t + 0.5 * step, 0.5 * step) * stepper.step(t, 0.5 * step);
        const double err = (big - half).cwiseAbs().maxCoeff();
        const double allowed =
            std::max(cfg.error_tolerance * step / total_span, kRoundoffFloor);
        if (err <= allowed || step <= h_min) {
            u = half * u;
            t = last ? t1 : t + step;
            const double grow =
                err > 0.0 ? 0.9 * std::pow(allowed / err, 0.25) : 4.0;
            h = std::min({step * std::clamp(grow, 0.2, 4.0), cfg.max_step});
            if (last) h = std::max(h, step);
        } else {
            h = step * std::clamp(0.9 * std::pow(allowed / err, 0.25), 0.1, 0.9);
            if (h < h_min) throw NumericalError("ladder integrator step size underflow");
        }
    }
}

}  // namespace

LadderPropagator propagate_drive(const AtomSpecies& species, int n_min, int n_max,
                                 double q_hbar_k, const LatticeDrive& drive,
                                 const EvolutionConfig& cfg)
{
    cfg.validate();
    if (n_max < n_min) throw std::invalid_argument("empty ladder window");
    if (!(drive.t_end >= drive.t_start)) throw std::invalid_argument("drive ends before it starts");
    const int size = n_max - n_min + 1;

    TridiagonalHamiltonian ham(species, n_min, size, q_hbar_k, drive);
    MagnusStepper stepper(ham);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(size, size);

    std::vector<double> cuts{drive.t_start};
    for (double b : drive.breakpoints)
        if (b > drive.t_start && b < drive.t_end) cuts.push_back(b);
    cuts.push_back(drive.t_end);
    std::sort(cuts.begin(), cuts.end());

    const double total = drive.t_end - drive.t_start;
    const double scale = drive.time_scale > 0.0 ? drive.time_scale : total;
    double h = std::min(cfg.max_step, 0.25 * scale);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
        integrate_segment(stepper, cuts[i], cuts[i + 1], total, h, cfg, u);

    const double theta0 = drive.phase ? drive.phase(drive.t_start) : 0.0;
    const double theta1 = drive.phase ? drive.phase(drive.t_end) : 0.0;
    return LadderPropagator(n_min, std::move(u), theta0, theta1, drive.laser_phase,
                            drive.t_start, drive.t_end);
}

LadderPropagator pulse_propagator(const AtomSpecies& species, int n_min, int n_max,
                                  double q_hbar_k, const PulseSpec& pulse, double t_start,
                                  const EvolutionConfig& cfg)
{
    pulse.validate();
    const double center = t_start + 0.5 * pulse.duration;
    const double delta = pulse.frequency_difference;
    const double chirp = 2.0 * pi * pulse.chirp;  // rad/s^2
    LatticeDrive drive;
    drive.rabi = [&pulse, center](double t) { return pulse.envelope(t - center); };
    drive.phase_rate = [delta, chirp](double t) { return delta + chirp * t; };
    drive.phase = [delta, chirp](double t) { return delta * t + 0.5 * chirp * t * t; };
    drive.laser_phase = pulse.laser_phase;
    drive.t_start = t_start;
    drive.t_end = t_start + pulse.duration;
    drive.time_scale = pulse.rms_width;
    return propagate_drive(species, n_min, n_max, q_hbar_k, drive, cfg);
}

void check_truncation(const MomentumLadderState& state, double limit)
{
    const double leak = state.edge_population();
    if (leak > limit) {
        std::ostringstream msg;
        msg << "ladder truncation: population " << leak << " reached the outer guard sites of ["
            << state.n_min() << ", " << state.n_max() << "]";
        throw TruncationError(msg.str(), leak);
    }
}

MomentumLadderState apply_pulse(const MomentumLadderState& state, const PulseSpec& pulse,
                                const EvolutionConfig& cfg)
{
    const LadderPropagator prop = pulse_propagator(state.species(), state.n_min(), state.n_max(),
                                                   state.q_hbar_k(), pulse, state.time(), cfg);
    MomentumLadderState out = state;
    prop.apply(out.amplitudes());
    out.set_time(prop.t_end());
    check_truncation(out, cfg.leakage_limit);
    return out;
}

MomentumLadderState free_propagate(const MomentumLadderState& state, double duration)
{
    if (!(duration >= 0.0)) throw std::invalid_argument("free propagation needs duration >= 0");
    MomentumLadderState out = state;
    const double wr = state.species().recoil_frequency();
    for (int i = 0; i < out.size(); ++i) {
        const double x = (out.n_min() + i) + 0.5 * state.q_hbar_k();
        out.amplitudes()[i] *= std::polar(1.0, -4.0 * wr * x * x * duration);
    }
    out.set_time(state.time() + duration);
    return out;
}

// ---------------------------------------------------------------------------
// Calibration

double simulate_transfer(const AtomSpecies& species, int order, double rms_width,
                         double q_hbar_k, double peak_rabi, const EvolutionConfig& cfg)
{
    if (order < 1) throw std::invalid_argument("Bragg order must be >= 1");
    const int guard = cfg.ladder_guard_sites;
    const PulseSpec pulse = PulseSpec::resonant(species, order, rms_width, peak_rabi);
    const LadderPropagator prop =
        pulse_propagator(species, -(order + guard), order + guard, q_hbar_k, pulse, 0.0, cfg);
    Eigen::VectorXcd col = prop.rotating_frame().col(order + guard);
    MomentumLadderState out(species, -(order + guard), order + guard, q_hbar_k);
    out.amplitudes() = col;
    check_truncation(out, cfg.leakage_limit);
    return out.population(order);
}

namespace {

constexpr double kScanFactor = 1.12;

double first_order_pi_rabi(double rms_width)
{
    return pi / (rms_width * std::sqrt(2.0 * pi));
}

std::string describe_sweep(const std::vector<TransferSample>& sweep)
{
    std::ostringstream os;
    os << "sweep (Omega0 rad/s -> transfer):";
    const std::size_t stride = std::max<std::size_t>(1, sweep.size() / 12);
    for (std::size_t i = 0; i < sweep.size(); i += stride)
        os << " " << sweep[i].peak_rabi << "->" << sweep[i].transfer;
    return os.str();
}

}  // namespace

double calibrate_pulse_amplitude(const AtomSpecies& species, double target, int order,
                                 double rms_width, double q_hbar_k, const EvolutionConfig& cfg)
{
    if (!(target > 0.0 && target <= 1.0))
        throw std::invalid_argument("calibration target must lie in (0, 1]");
    const double base = first_order_pi_rabi(rms_width);
    const double ceiling = base * 2000.0;
    auto transfer = [&](double rabi) {
        return simulate_transfer(species, order, rms_width, q_hbar_k, rabi, cfg);
    };

    std::vector<TransferSample> sweep;
    double lo = 0.0;
    double f_lo = -target;
    double hi = 0.0;
    double f_hi = 0.0;
    double best = 0.0;
    int falling = 0;
    for (double rabi = 0.02 * base; rabi <= ceiling; rabi *= kScanFactor) {
        const double tr = transfer(rabi);
        sweep.push_back({rabi, tr});
        if (std::abs(tr - target) <= 1e-7) return rabi;
        if (tr > target) {
            hi = rabi;
            f_hi = tr - target;
            break;
        }
        falling = (tr < best) ? falling + 1 : 0;
        best = std::max(best, tr);
        if (falling >= 2 && best < target) break;
        lo = rabi;
        f_lo = tr - target;
    }
    if (hi == 0.0) {
        throw CalibrationError("no Rabi-lobe bracket for transfer target " +
                               std::to_string(target) + " (first-lobe maximum " +
                               std::to_string(best) + "); " + describe_sweep(sweep));
    }

    // Illinois regula falsi on the bracketing interval.
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        const double mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
        const double f_mid = transfer(mid) - target;
        if (std::abs(f_mid) <= 1e-7 || (hi - lo) <= 1e-12 * hi) return mid;
        if (f_mid > 0.0) {
            hi = mid;
            f_hi = f_mid;
            if (side == -1) f_lo *= 0.5;
            side = -1;
        } else {
            lo = mid;
            f_lo = f_mid;
            if (side == +1) f_hi *= 0.5;
            side = +1;
        }
    }
    throw CalibrationError("calibration did not converge; " + describe_sweep(sweep));
}

TransferSample first_lobe_peak(const AtomSpecies& species, int order, double rms_width,
                               double q_hbar_k, const EvolutionConfig& cfg)
{
    const double base = first_order_pi_rabi(rms_width);
    const double ceiling = base * 2000.0;
    auto transfer = [&](double rabi) {
        return simulate_transfer(species, order, rms_width, q_hbar_k, rabi, cfg);
    };

    std::vector<TransferSample> sweep;
    for (double rabi = 0.02 * base; rabi <= ceiling; rabi *= kScanFactor) {
        sweep.push_back({rabi, transfer(rabi)});
        const std::size_t k = sweep.size();
        if (k >= 3 && sweep[k - 1].transfer < sweep[k - 2].transfer &&
            sweep[k - 2].transfer > 1e-3) {
            // Golden-section search on the bracketing triple.
            double a = sweep[k - 3].peak_rabi;
            double b = sweep[k - 1].peak_rabi;
            const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
            double c = b - gr * (b - a);
            double d = a + gr * (b - a);
            double fc = transfer(c);
            double fd = transfer(d);
            while ((b - a) > 1e-7 * b) {
                if (fc > fd) {
                    b = d;
                    d = c;
                    fd = fc;
                    c = b - gr * (b - a);
                    fc = transfer(c);
                } else {
                    a = c;
                    c = d;
                    fc = fd;
                    d = a + gr * (b - a);
                    fd = transfer(d);
                }
            }
            const double peak = 0.5 * (a + b);
            return {peak, transfer(peak)};
        }
    }
    throw CalibrationError("first Rabi lobe not found below the search ceiling; " +
                           describe_sweep(sweep));
}

}  // namespace bragg
