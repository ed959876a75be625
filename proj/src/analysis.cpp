#include "bragg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>

#include "bragg/constants.hpp"
#include "bragg/errors.hpp"

namespace bragg {

using constants::pi;

void FringeScan::validate() const
{
    for (std::size_t i = 1; i < phase.size(); ++i)
        if (!(phase[i] > phase[i - 1])) throw std::invalid_argument("scan grid must be strictly increasing");
    if (normalized.size() != phase.size()) throw std::invalid_argument("scan arrays differ in length");
    for (const auto& [site, pops] : ports) {
        if (pops.size() != phase.size()) throw std::invalid_argument("scan arrays differ in length");
        for (double p : pops)
            if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("port population outside [0, 1]");
    }
}

// ---------------------------------------------------------------------------
// Harmonic fits

double HarmonicFit::evaluate(double x) const noexcept
{
    double v = offset;
    for (int n = 1; n <= harmonics(); ++n) v += amplitude[n - 1] * std::cos(n * x + phase[n - 1]);
    return v;
}

double HarmonicFit::derivative(double x) const noexcept
{
    double v = 0.0;
    for (int n = 1; n <= harmonics(); ++n) v -= n * amplitude[n - 1] * std::sin(n * x + phase[n - 1]);
    return v;
}

int HarmonicFit::dominant_harmonic() const
{
    if (amplitude.empty()) throw std::logic_error("empty harmonic fit");
    return static_cast<int>(std::max_element(amplitude.begin(), amplitude.end()) - amplitude.begin()) + 1;
}

HarmonicFit fit_harmonics(const std::vector<double>& phase, const std::vector<double>& values,
                          int harmonics)
{
    if (harmonics < 1 || harmonics > 5) throw std::invalid_argument("harmonic count must lie in [1, 5]");
    if (phase.size() != values.size()) throw std::invalid_argument("phase and value arrays differ in length");
    const int rows = static_cast<int>(phase.size());
    const int cols = 2 * harmonics + 1;
    if (rows < cols) throw FitError("fringe grid too sparse for the requested harmonics");

    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd y(rows);
    for (int i = 0; i < rows; ++i) {
        a(i, 0) = 1.0;
        for (int n = 1; n <= harmonics; ++n) {
            a(i, 2 * n - 1) = std::cos(n * phase[i]);
            a(i, 2 * n) = std::sin(n * phase[i]);
        }
        y[i] = values[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    qr.setThreshold(1e-10);
    if (qr.rank() < cols) throw FitError("rank-deficient harmonic design; grid too sparse");
    const Eigen::VectorXd x = qr.solve(y);

    HarmonicFit fit;
    fit.offset = x[0];
    for (int n = 1; n <= harmonics; ++n) {
        const double c = x[2 * n - 1];
        const double s = x[2 * n];
        fit.amplitude.push_back(std::hypot(c, s));
        double theta = std::atan2(-s, c);
        if (theta <= -pi) theta += 2.0 * pi;
        fit.phase.push_back(theta);
    }
    fit.residual_rms = std::sqrt((a * x - y).squaredNorm() / rows);
    return fit;
}

HarmonicFit fit_harmonics(const FringeScan& scan, int harmonics)
{
    return fit_harmonics(scan.phase, scan.normalized, harmonics);
}

Contrast fringe_contrast(const HarmonicFit& fit)
{
    constexpr int kGrid = 4096;
    double lo = fit.evaluate(0.0);
    double hi = lo;
    for (int i = 1; i < kGrid; ++i) {
        const double v = fit.evaluate(2.0 * pi * i / kGrid);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    Contrast c;
    if (lo < 0.0) {
        lo = 0.0;
        c.clamped = true;
    }
    c.value = (hi + lo) > 0.0 ? (hi - lo) / (hi + lo) : 0.0;
    return c;
}

double phase_to_gravity(double phase_shift, int harmonic, double k_eff, double interrogation_time)
{
    if (harmonic < 1) throw std::invalid_argument("harmonic index must be >= 1");
    if (!(interrogation_time > 0.0)) throw std::invalid_argument("interrogation time must be positive");
    if (!(k_eff > 0.0)) throw std::invalid_argument("k_eff must be positive");
    return phase_shift / (harmonic * k_eff * interrogation_time * interrogation_time);
}

double invert_fringe(const HarmonicFit& fit, double value, double lo, double hi)
{
    double f_lo = fit.evaluate(lo) - value;
    double f_hi = fit.evaluate(hi) - value;
    if (f_lo * f_hi > 0.0) return std::abs(f_lo) < std::abs(f_hi) ? lo : hi;
    for (int it = 0; it < 200 && (hi - lo) > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = fit.evaluate(mid) - value;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double steepest_point(const HarmonicFit& fit)
{
    constexpr int kGrid = 8192;
    double best = 0.0;
    double best_slope = -1.0;
    for (int i = 0; i < kGrid; ++i) {
        const double x = 2.0 * pi * i / kGrid;
        const double s = std::abs(fit.derivative(x));
        if (s > best_slope) {
            best_slope = s;
            best = x;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Allan deviation

double AllanCurve::loglog_slope(double tau_min, double tau_max) const
{
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double n = 0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
        if (tau[i] < tau_min || tau[i] > tau_max) continue;
        const double x = std::log(tau[i]);
        const double y = std::log(deviation[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        n += 1;
    }
    if (n < 2) throw std::logic_error("need at least two Allan points for a slope");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double AllanCurve::at(double t) const
{
    if (tau.empty()) throw std::logic_error("empty Allan curve");
    std::size_t best = 0;
    for (std::size_t i = 1; i < tau.size(); ++i)
        if (std::abs(std::log(tau[i] / t)) < std::abs(std::log(tau[best] / t))) best = i;
    return deviation[best];
}

AllanCurve allan_deviation(const std::vector<double>& series, double shot_period,
                           const std::vector<double>& tau_grid)
{
    if (!(shot_period > 0.0)) throw std::invalid_argument("shot period must be positive");
    const std::size_t len = series.size();
    std::vector<double> prefix(len + 1, 0.0);
    for (std::size_t i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + series[i];

    std::vector<std::size_t> ms;
    AllanCurve curve;
    for (double t : tau_grid) {
        if (!(t > 0.0)) throw std::invalid_argument("averaging times must be positive");
        const auto m = static_cast<std::size_t>(std::max(1.0, std::round(t / shot_period)));
        if (len < 2 * m) {
            curve.omitted_tau.push_back(t);
            continue;
        }
        ms.push_back(m);
    }
    std::sort(ms.begin(), ms.end());
    ms.erase(std::unique(ms.begin(), ms.end()), ms.end());
    for (std::size_t m : ms) {
        const std::size_t terms = len - 2 * m + 1;
        double sum = 0.0;
        for (std::size_t j = 0; j < terms; ++j) {
            const double d = (prefix[j + 2 * m] - 2.0 * prefix[j + m] + prefix[j]) / m;
            sum += d * d;
        }
        curve.tau.push_back(m * shot_period);
        curve.deviation.push_back(std::sqrt(sum / (2.0 * terms)));
    }
    return curve;
}

std::vector<double> default_tau_grid(std::size_t length, double shot_period, int per_decade)
{
    std::vector<double> grid;
    const double top = std::max(1.0, std::floor(length / 4.0));
    double last = 0.0;
    for (int i = 0;; ++i) {
        const double m = std::round(std::pow(10.0, static_cast<double>(i) / per_decade));
        if (m > top) break;
        if (m > last) grid.push_back(m * shot_period);
        last = m;
    }
    return grid;
}

// ---------------------------------------------------------------------------
// Correlation

namespace {

std::vector<double> z_normalize(const std::vector<double>& v)
{
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / n);
    if (!(sd > 0.0) || sd <= 1e-15 * std::max(1.0, std::abs(mean)))
        throw NumericalError("series has zero variance; correlation undefined");
    std::vector<double> z(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) z[i] = (v[i] - mean) / sd;
    return z;
}

}  // namespace

Correlation gradiometer_correlation(const std::vector<double>& first,
                                    const std::vector<double>& second)
{
    if (first.size() != second.size()) throw std::invalid_argument("series differ in length");
    if (first.size() < 10) throw std::invalid_argument("correlation needs at least 10 samples");
    Correlation c;
    c.z_first = z_normalize(first);
    c.z_second = z_normalize(second);
    double s = 0.0;
    for (std::size_t i = 0; i < first.size(); ++i) s += c.z_first[i] * c.z_second[i];
    c.pearson = std::clamp(s / first.size(), -1.0, 1.0);
    return c;
}

// ---------------------------------------------------------------------------
// Interferometer classes

namespace {

template <class W>
InterferometerClass enumerate_class(int j, int a_min, int a_max, double interrogation_time,
                                    const AtomSpecies& species, const std::vector<W>& weights)
{
    if (a_max < a_min) throw std::invalid_argument("empty trajectory range");
    const std::size_t count = static_cast<std::size_t>(a_max - a_min + 1);
    if (!weights.empty() && weights.size() != count)
        throw std::invalid_argument("weights must match the trajectory range");
    InterferometerClass cls;
    cls.j = j;
    cls.interrogation_time = interrogation_time;
    std::complex<double> sum = 0.0;
    double total = 0.0;
    for (int a = a_min; a <= a_max; ++a) {
        const double ph = path_phase(j, a, interrogation_time, species);
        cls.trajectories.push_back({a, j - a, ph});
        const W w = weights.empty() ? W(1.0) : weights[static_cast<std::size_t>(a - a_min)];
        sum += w * std::polar(1.0, ph);
        total += std::abs(w);
    }
    cls.contrast_proxy = total > 0.0 ? std::abs(sum) / total : 0.0;
    return cls;
}

}  // namespace

InterferometerClass enumerate_interferometer_class(int j, int a_min, int a_max,
                                                   double interrogation_time,
                                                   const AtomSpecies& species,
                                                   const std::vector<double>& weights)
{
    for (double w : weights)
        if (w < 0.0) throw std::invalid_argument("trajectory weights must be >= 0");
    return enumerate_class(j, a_min, a_max, interrogation_time, species, weights);
}

InterferometerClass enumerate_interferometer_class(
    int j, int a_min, int a_max, double interrogation_time, const AtomSpecies& species,
    const std::vector<std::complex<double>>& weights)
{
    return enumerate_class(j, a_min, a_max, interrogation_time, species, weights);
}

int congruence_groups(const std::vector<double>& phases, double tolerance)
{
    if (phases.empty()) return 0;
    std::vector<double> r;
    r.reserve(phases.size());
    for (double p : phases) {
        double x = std::fmod(p, 2.0 * pi);
        if (x < 0.0) x += 2.0 * pi;
        r.push_back(x);
    }
    std::sort(r.begin(), r.end());
    int groups = 1;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i] - r[i - 1] > tolerance) ++groups;
    if (groups > 1 && r.front() + 2.0 * pi - r.back() <= tolerance) --groups;
    return groups;
}

// ---------------------------------------------------------------------------
// Time series

std::vector<Bin> bin_timeseries(const std::vector<double>& series, std::size_t bin_size)
{
    if (bin_size < 1) throw std::invalid_argument("bin size must be >= 1");
    std::vector<Bin> bins;
    for (std::size_t start = 0; start + bin_size <= series.size(); start += bin_size) {
        Bin b;
        b.first = start;
        b.count = bin_size;
        double sum = 0.0;
        for (std::size_t i = start; i < start + bin_size; ++i) sum += series[i];
        b.mean = sum / bin_size;
        if (bin_size > 1) {
            double var = 0.0;
            for (std::size_t i = start; i < start + bin_size; ++i)
                var += (series[i] - b.mean) * (series[i] - b.mean);
            var /= static_cast<double>(bin_size - 1);
            b.standard_error = std::sqrt(var / bin_size);
            b.error_defined = true;
        }
        bins.push_back(b);
    }
    return bins;
}

SinusoidFit fit_sinusoids(const std::vector<double>& t, const std::vector<double>& y,
                          const std::vector<double>& angular_frequencies)
{
    if (t.size() != y.size()) throw std::invalid_argument("time and value arrays differ in length");
    const int k = static_cast<int>(angular_frequencies.size());
    const int rows = static_cast<int>(t.size());
    const int cols = 2 * k + 1;
    if (rows <= cols) throw FitError("too few samples for the sinusoid fit");
    Eigen::MatrixXd a(rows, cols);
    Eigen::VectorXd v(rows);
    for (int i = 0; i < rows; ++i) {
        a(i, 0) = 1.0;
        for (int c = 0; c < k; ++c) {
            a(i, 2 * c + 1) = std::cos(angular_frequencies[c] * t[i]);
            a(i, 2 * c + 2) = std::sin(angular_frequencies[c] * t[i]);
        }
        v[i] = y[i];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < cols) throw FitError("rank-deficient sinusoid design");
    const Eigen::VectorXd x = qr.solve(v);
    const double sigma2 = (a * x - v).squaredNorm() / (rows - cols);
    const Eigen::MatrixXd cov = sigma2 * (a.transpose() * a).inverse();

    SinusoidFit fit;
    fit.offset = x[0];
    for (int c = 0; c < k; ++c) {
        const int ic = 2 * c + 1;
        const int is = 2 * c + 2;
        const double amp = std::hypot(x[ic], x[is]);
        fit.amplitude.push_back(amp);
        fit.phase.push_back(std::atan2(-x[is], x[ic]));
        const double var = amp > 0.0
                               ? (x[ic] * x[ic] * cov(ic, ic) + x[is] * x[is] * cov(is, is) +
                                  2.0 * x[ic] * x[is] * cov(ic, is)) / (amp * amp)
                               : 0.5 * (cov(ic, ic) + cov(is, is));
        fit.amplitude_error.push_back(std::sqrt(std::max(var, 0.0)));
    }
    return fit;
}

std::vector<double> peak_positions(const std::vector<double>& x, const std::vector<double>& y,
                                   double threshold)
{
    if (x.size() != y.size()) throw std::invalid_argument("peak arrays differ in length");
    std::vector<double> peaks;
    if (y.size() < 3) return peaks;
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    const double level = *mn + threshold * (*mx - *mn);
    for (std::size_t i = 1; i + 1 < y.size(); ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= level)) continue;
        const double x0 = x[i - 1], x1 = x[i], x2 = x[i + 1];
        const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
        const double d0 = (y1 - y0) / (x1 - x0);
        const double d1 = (y2 - y1) / (x2 - x1);
        const double curv = (d1 - d0) / (x2 - x0);
        double px = x1;
        if (curv < 0.0) px = 0.5 * (x0 + x1) - d0 / (2.0 * curv);
        peaks.push_back(std::clamp(px, x0, x2));
    }
    return peaks;
}

}  // namespace bragg
