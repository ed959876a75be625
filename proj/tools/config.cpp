#include "config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "bragg/constants.hpp"
#include "bragg/errors.hpp"

namespace cli {

using bragg::ConfigError;

std::vector<double> Grid::values() const
{
    std::vector<double> v;
    for (int i = 0; i < points; ++i) v.push_back(start + step * i);
    return v;
}

namespace {

const json& empty_object()
{
    static const json e = json::object();
    return e;
}

std::string join(const std::string& path, const std::string& key)
{
    return path.empty() ? key : path + "." + key;
}

// One JSON object being read; remembers which keys were consumed.
class Block {
public:
    Block(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
    }

    const std::string& path() const { return path_; }

    void get(const char* key, double& out) { read(key, [&](const json& v, const std::string& p) { out = number(v, p); }); }
    void get(const char* key, int& out) { read(key, [&](const json& v, const std::string& p) { out = integer(v, p); }); }
    void get(const char* key, std::uint64_t& out)
    {
        read(key, [&](const json& v, const std::string& p) {
            if (!v.is_number_unsigned()) throw ConfigError(p + ": expected a non-negative integer");
            out = v.get<std::uint64_t>();
        });
    }
    void get(const char* key, std::string& out)
    {
        read(key, [&](const json& v, const std::string& p) {
            if (!v.is_string()) throw ConfigError(p + ": expected a string");
            out = v.get<std::string>();
        });
    }
    void get(const char* key, std::vector<double>& out)
    {
        read(key, [&](const json& v, const std::string& p) {
            if (!v.is_array()) throw ConfigError(p + ": expected an array of numbers");
            out.clear();
            for (std::size_t i = 0; i < v.size(); ++i)
                out.push_back(number(v[i], p + "[" + std::to_string(i) + "]"));
        });
    }
    template <class T>
    void get(const char* key, std::optional<T>& out)
    {
        if (j_.contains(key) && j_.at(key).is_null()) {
            seen_.insert(key);
            out.reset();
            return;
        }
        if (!j_.contains(key)) return;
        T v{};
        get(key, v);
        out = v;
    }
    void get(const char* key, Grid& g)
    {
        Block b = sub(key);
        b.get("start", g.start);
        b.get("step", g.step);
        b.get("points", g.points);
        b.finish();
    }

    Block sub(const char* key)
    {
        seen_.insert(key);
        if (!j_.contains(key)) return Block(empty_object(), join(path_, key));
        return Block(j_.at(key), join(path_, key));
    }
    bool has(const char* key) const { return j_.contains(key); }
    const json& raw(const char* key)
    {
        seen_.insert(key);
        return j_.at(key);
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()) + ": unknown key");
    }

private:
    std::string where() const { return path_.empty() ? "config" : path_; }

    template <class F>
    void read(const char* key, F&& f)
    {
        seen_.insert(key);
        if (!j_.contains(key)) return;
        f(j_.at(key), join(path_, key));
    }

    static double number(const json& v, const std::string& p)
    {
        if (!v.is_number()) throw ConfigError(p + ": expected a number");
        return v.get<double>();
    }
    static int integer(const json& v, const std::string& p)
    {
        if (!v.is_number_integer()) throw ConfigError(p + ": expected an integer");
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
            throw ConfigError(p + ": integer out of range");
        return static_cast<int>(x);
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json grid_json(const Grid& g) { return {{"start", g.start}, {"step", g.step}, {"points", g.points}}; }

template <class T>
json opt_json(const std::optional<T>& v)
{
    return v ? json(*v) : json(nullptr);
}

void require(bool ok, const std::string& what)
{
    if (!ok) throw ConfigError(what);
}

void require_grid(const Grid& g, const std::string& path)
{
    require(g.points >= 1, path + ".points: grid is empty");
    require(g.points == 1 || g.step > 0.0, path + ".step: must be positive");
    require(std::isfinite(g.start) && std::isfinite(g.step), path + ": must be finite");
}

}  // namespace

ExperimentConfig::ExperimentConfig()
{
    const auto rb = bragg::AtomSpecies::rubidium87();
    mass = rb.mass();
    wavelength = rb.wavelength();
}

bragg::AtomSpecies ExperimentConfig::species() const
{
    try {
        return bragg::AtomSpecies(mass, wavelength);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("species: ") + e.what());
    }
}

bragg::NoiseModel ExperimentConfig::noise_model() const
{
    bragg::NoiseModel m;
    m.mirror_phase_rms = noise.mirror_phase_rms;
    m.detection_snr = noise.detection_snr ? *noise.detection_snr
                                          : std::numeric_limits<double>::infinity();
    m.tilt = tilt;
    m.tilt_drift = noise.tilt_drift;
    return m;
}

bragg::TideModel ExperimentConfig::tide_model() const
{
    bragg::TideModel t;
    t.mean_gravity = tide.mean_gravity;
    for (const auto& c : tide.components)
        t.components.push_back({c.amplitude, 2.0 * bragg::constants::pi / c.period, c.phase});
    return t;
}

bragg::MZISequence ExperimentConfig::build_sequence(double interrogation_time) const
{
    const auto sp = species();
    bragg::MZISequence s;
    if (sequence.beamsplitter_rabi && sequence.mirror_rabi) {
        const int n = std::abs(sequence.order);
        s.order = sequence.order;
        s.input_site = sequence.input_site;
        s.beamsplitter = bragg::PulseSpec::resonant(sp, n, sequence.rms_width, *sequence.beamsplitter_rabi);
        s.mirror = bragg::PulseSpec::resonant(sp, n, sequence.rms_width, *sequence.mirror_rabi);
        const double delta = bragg::transition_frequency(sp, s.input_site, s.order);
        s.beamsplitter.frequency_difference = delta;
        s.mirror.frequency_difference = delta;
    } else {
        s = bragg::MZISequence::calibrated(sp, sequence.order, interrogation_time,
                                           sequence.rms_width, evolution, sequence.input_site);
        if (sequence.beamsplitter_rabi) s.beamsplitter.peak_rabi = *sequence.beamsplitter_rabi;
        if (sequence.mirror_rabi) s.mirror.peak_rabi = *sequence.mirror_rabi;
    }
    s.interrogation_time = interrogation_time;
    s.sweep_rate = sequence.sweep_rate;
    s.final_phase = sequence.final_phase;
    s.coherence = sequence.coherence == "plane_wave" ? bragg::Coherence::plane_wave
                                                     : bragg::Coherence::class_resolved;
    return s;
}

ExperimentConfig parse_config(const json& doc)
{
    ExperimentConfig c;
    Block top(doc, "");
    top.get("seed", c.seed);
    {
        Block b = top.sub("species");
        b.get("mass", c.mass);
        b.get("wavelength", c.wavelength);
        b.finish();
    }
    {
        Block b = top.sub("geometry");
        b.get("tilt", c.tilt);
        b.finish();
    }
    {
        Block b = top.sub("evolution");
        b.get("max_step", c.evolution.max_step);
        b.get("error_tolerance", c.evolution.error_tolerance);
        b.get("ladder_guard_sites", c.evolution.ladder_guard_sites);
        b.get("leakage_limit", c.evolution.leakage_limit);
        b.finish();
    }
    {
        Block b = top.sub("pulse");
        b.get("order", c.pulse.order);
        b.get("rms_width", c.pulse.rms_width);
        b.get("q_hbar_k", c.pulse.q_hbar_k);
        b.get("half_width_sigmas", c.pulse.half_width_sigmas);
        b.get("area", c.pulse.area);
        b.finish();
    }
    {
        Block b = top.sub("sequence");
        b.get("order", c.sequence.order);
        b.get("input_site", c.sequence.input_site);
        b.get("interrogation_time", c.sequence.interrogation_time);
        b.get("rms_width", c.sequence.rms_width);
        b.get("sweep_rate", c.sequence.sweep_rate);
        b.get("final_phase", c.sequence.final_phase);
        b.get("coherence", c.sequence.coherence);
        b.get("beamsplitter_rabi", c.sequence.beamsplitter_rabi);
        b.get("mirror_rabi", c.sequence.mirror_rabi);
        b.finish();
    }
    {
        Block b = top.sub("ensemble");
        b.get("sample_count", c.ensemble.sample_count);
        b.get("sigma_q", c.ensemble.sigma_q);
        b.get("explicit_q", c.ensemble.explicit_q);
        b.get("seed", c.ensemble.seed);
        b.finish();
    }
    {
        Block b = top.sub("noise");
        b.get("mirror_phase_rms", c.noise.mirror_phase_rms);
        b.get("detection_snr", c.noise.detection_snr);
        b.get("tilt_drift", c.noise.tilt_drift);
        b.finish();
    }
    {
        Block b = top.sub("tide");
        b.get("mean_gravity", c.tide.mean_gravity);
        if (b.has("components")) {
            const json& arr = b.raw("components");
            const std::string p = b.path() + ".components";
            if (!arr.is_array()) throw ConfigError(p + ": expected an array");
            c.tide.components.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                Block e(arr[i], p + "[" + std::to_string(i) + "]");
                TideBlock::Component comp;
                e.get("amplitude", comp.amplitude);
                e.get("period", comp.period);
                e.get("phase", comp.phase);
                e.finish();
                c.tide.components.push_back(comp);
            }
        }
        b.finish();
    }
    {
        Block b = top.sub("scan");
        b.get("target", c.scan.target);
        b.get("grid", c.scan.grid);
        b.get("shot_period", c.scan.shot_period);
        b.finish();
    }
    {
        Block b = top.sub("fit");
        b.get("harmonics", c.fit.harmonics);
        b.get("phase_points", c.fit.phase_points);
        b.get("phase_periods", c.fit.phase_periods);
        b.get("peak_threshold", c.fit.peak_threshold);
        b.finish();
    }
    {
        Block b = top.sub("bvs");
        b.get("depth", c.bvs.ramp.depth);
        b.get("load_duration", c.bvs.ramp.load_duration);
        b.get("sweep_duration", c.bvs.ramp.sweep_duration);
        b.get("target_momentum", c.bvs.ramp.target_momentum);
        b.get("momentum", c.bvs.momentum);
        b.finish();
    }
    {
        Block b = top.sub("gradiometer");
        b.get("upper_momentum", c.gradiometer.upper_momentum);
        b.get("lower_momentum", c.gradiometer.lower_momentum);
        b.get("coupling_order", c.gradiometer.coupling_order);
        b.get("bvs_separation", c.gradiometer.bvs_separation);
        b.get("gradient", c.gradiometer.gradient);
        b.get("shots", c.gradiometer.shots);
        b.get("laser_phase", c.gradiometer.laser_phase);
        b.finish();
    }
    {
        Block b = top.sub("gravity_run");
        b.get("shots", c.gravity_run.shots);
        b.get("shot_period", c.gravity_run.shot_period);
        b.get("sensitivity", c.gravity_run.sensitivity);
        b.get("bin_size", c.gravity_run.bin_size);
        b.get("interrogation_time", c.gravity_run.interrogation_time);
        b.get("response", c.gravity_run.response);
        b.get("contrast", c.gravity_run.contrast);
        b.finish();
    }
    {
        Block b = top.sub("allan");
        b.get("input", c.allan.input);
        b.get("column", c.allan.column);
        b.get("shot_period", c.allan.shot_period);
        b.get("sensitivity", c.allan.sensitivity);
        b.get("shots", c.allan.shots);
        b.get("per_decade", c.allan.per_decade);
        b.get("tau", c.allan.tau);
        b.finish();
    }
    {
        Block b = top.sub("class_oracle");
        b.get("j", c.class_oracle.j);
        b.get("a_min", c.class_oracle.a_min);
        b.get("a_max", c.class_oracle.a_max);
        b.get("weights", c.class_oracle.weights);
        b.get("port", c.class_oracle.port);
        b.finish();
    }
    {
        Block b = top.sub("output");
        b.get("dir", c.output_dir);
        b.finish();
    }
    top.finish();
    return c;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError("'" + path + "': " + e.what());
    }
    return parse_config(doc);
}

json to_json(const ExperimentConfig& c)
{
    json j;
    j["seed"] = c.seed;
    j["species"] = {{"mass", c.mass}, {"wavelength", c.wavelength}};
    j["geometry"] = {{"tilt", c.tilt}};
    j["evolution"] = {{"max_step", c.evolution.max_step},
                      {"error_tolerance", c.evolution.error_tolerance},
                      {"ladder_guard_sites", c.evolution.ladder_guard_sites},
                      {"leakage_limit", c.evolution.leakage_limit}};
    j["pulse"] = {{"order", c.pulse.order},
                  {"rms_width", c.pulse.rms_width},
                  {"q_hbar_k", c.pulse.q_hbar_k},
                  {"half_width_sigmas", c.pulse.half_width_sigmas},
                  {"area", grid_json(c.pulse.area)}};
    j["sequence"] = {{"order", c.sequence.order},
                     {"input_site", c.sequence.input_site},
                     {"interrogation_time", c.sequence.interrogation_time},
                     {"rms_width", c.sequence.rms_width},
                     {"sweep_rate", opt_json(c.sequence.sweep_rate)},
                     {"final_phase", c.sequence.final_phase},
                     {"coherence", c.sequence.coherence},
                     {"beamsplitter_rabi", opt_json(c.sequence.beamsplitter_rabi)},
                     {"mirror_rabi", opt_json(c.sequence.mirror_rabi)}};
    j["ensemble"] = {{"sample_count", c.ensemble.sample_count},
                     {"sigma_q", c.ensemble.sigma_q},
                     {"explicit_q", c.ensemble.explicit_q},
                     {"seed", c.ensemble.seed}};
    j["noise"] = {{"mirror_phase_rms", c.noise.mirror_phase_rms},
                  {"detection_snr", opt_json(c.noise.detection_snr)},
                  {"tilt_drift", c.noise.tilt_drift}};
    json comps = json::array();
    for (const auto& t : c.tide.components)
        comps.push_back({{"amplitude", t.amplitude}, {"period", t.period}, {"phase", t.phase}});
    j["tide"] = {{"mean_gravity", c.tide.mean_gravity}, {"components", comps}};
    j["scan"] = {{"target", c.scan.target},
                 {"grid", grid_json(c.scan.grid)},
                 {"shot_period", c.scan.shot_period}};
    j["fit"] = {{"harmonics", c.fit.harmonics},
                {"phase_points", c.fit.phase_points},
                {"phase_periods", c.fit.phase_periods},
                {"peak_threshold", c.fit.peak_threshold}};
    j["bvs"] = {{"depth", c.bvs.ramp.depth},
                {"load_duration", c.bvs.ramp.load_duration},
                {"sweep_duration", c.bvs.ramp.sweep_duration},
                {"target_momentum", c.bvs.ramp.target_momentum},
                {"momentum", grid_json(c.bvs.momentum)}};
    j["gradiometer"] = {{"upper_momentum", c.gradiometer.upper_momentum},
                        {"lower_momentum", c.gradiometer.lower_momentum},
                        {"coupling_order", c.gradiometer.coupling_order},
                        {"bvs_separation", c.gradiometer.bvs_separation},
                        {"gradient", c.gradiometer.gradient},
                        {"shots", c.gradiometer.shots},
                        {"laser_phase", opt_json(c.gradiometer.laser_phase)}};
    j["gravity_run"] = {{"shots", c.gravity_run.shots},
                        {"shot_period", c.gravity_run.shot_period},
                        {"sensitivity", c.gravity_run.sensitivity},
                        {"bin_size", c.gravity_run.bin_size},
                        {"interrogation_time", c.gravity_run.interrogation_time},
                        {"response", c.gravity_run.response},
                        {"contrast", c.gravity_run.contrast}};
    j["allan"] = {{"input", opt_json(c.allan.input)},
                  {"column", c.allan.column},
                  {"shot_period", c.allan.shot_period},
                  {"sensitivity", c.allan.sensitivity},
                  {"shots", c.allan.shots},
                  {"per_decade", c.allan.per_decade},
                  {"tau", c.allan.tau}};
    j["class_oracle"] = {{"j", opt_json(c.class_oracle.j)},
                         {"a_min", c.class_oracle.a_min},
                         {"a_max", c.class_oracle.a_max},
                         {"weights", c.class_oracle.weights},
                         {"port", opt_json(c.class_oracle.port)}};
    j["output"] = {{"dir", c.output_dir}};
    return j;
}

void validate_for(const ExperimentConfig& c, const std::string& command)
{
    auto wrap = [](const char* block, auto&& fn) {
        try {
            fn();
        } catch (const ConfigError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string(block) + ": " + e.what());
        }
    };
    c.species();
    wrap("evolution", [&] { c.evolution.validate(); });
    wrap("noise", [&] { c.noise_model().validate(); });
    require(!c.noise.detection_snr || *c.noise.detection_snr > 0.0,
            "noise.detection_snr: must be positive or null");
    wrap("ensemble", [&] { c.ensemble.validate(); });
    wrap("tide", [&] { c.tide_model().validate(); });
    for (std::size_t i = 0; i < c.tide.components.size(); ++i)
        require(c.tide.components[i].period > 0.0,
                "tide.components[" + std::to_string(i) + "].period: must be positive");
    require(c.tilt >= 0.0 && c.tilt < 0.5 * bragg::constants::pi, "geometry.tilt: must lie in [0, pi/2)");
    require(c.sequence.coherence == "class_resolved" || c.sequence.coherence == "plane_wave",
            "sequence.coherence: expected 'class_resolved' or 'plane_wave'");
    require(c.sequence.order != 0, "sequence.order: must be non-zero");
    require(c.sequence.rms_width > 0.0, "sequence.rms_width: must be positive");
    require(c.fit.harmonics >= 1 && c.fit.harmonics <= 5, "fit.harmonics: must lie in [1, 5]");
    require(c.fit.phase_points >= 1, "fit.phase_points: grid is empty");
    require(c.fit.phase_periods > 0.0, "fit.phase_periods: must be positive");

    const std::string& target = c.scan.target;
    require(target == "laser_phase" || target == "sweep_rate" || target == "interrogation_time",
            "scan.target: expected 'laser_phase', 'sweep_rate' or 'interrogation_time'");
    require(c.scan.shot_period >= 0.0, "scan.shot_period: must be >= 0");

    if (command == "pulse") {
        require(c.pulse.order >= 1, "pulse.order: must be >= 1");
        require(c.pulse.rms_width > 0.0, "pulse.rms_width: must be positive");
        require(c.pulse.half_width_sigmas >= 3.0, "pulse.half_width_sigmas: must be >= 3");
        require(std::abs(c.pulse.q_hbar_k) <= 1.0, "pulse.q_hbar_k: must satisfy |q| <= 1");
        require_grid(c.pulse.area, "pulse.area");
    } else if (command == "bvs") {
        wrap("bvs", [&] { c.bvs.ramp.validate(); });
        require_grid(c.bvs.momentum, "bvs.momentum");
        for (double q : c.bvs.momentum.values())
            require(std::abs(q) <= 2.0, "bvs.momentum: values must satisfy |q| <= 2");
    } else if (command == "fringe") {
        require(target == "laser_phase" || target == "sweep_rate",
                "scan.target: fringe scans step 'laser_phase' or 'sweep_rate'");
        require_grid(c.scan.grid, "scan.grid");
    } else if (command == "revivals" || command == "class-oracle") {
        require(target == "interrogation_time",
                "scan.target: " + command + " needs 'interrogation_time'");
        require_grid(c.scan.grid, "scan.grid");
        require(c.scan.grid.start > 0.0, "scan.grid.start: interrogation time must be positive");
        if (command == "class-oracle") {
            require(c.class_oracle.a_max >= c.class_oracle.a_min,
                    "class_oracle.a_max: must be >= a_min");
            require(c.class_oracle.weights == "simulated" || c.class_oracle.weights == "uniform",
                    "class_oracle.weights: expected 'simulated' or 'uniform'");
        }
    } else if (command == "gradiometer") {
        require(c.gradiometer.shots >= 10, "gradiometer.shots: need at least 10");
        require(c.gradiometer.coupling_order >= 1, "gradiometer.coupling_order: must be >= 1");
    } else if (command == "gravity-run") {
        require(c.gravity_run.shots >= 2, "gravity_run.shots: need at least 2");
        require(c.gravity_run.shot_period > 0.0, "gravity_run.shot_period: must be positive");
        require(c.gravity_run.sensitivity >= 0.0, "gravity_run.sensitivity: must be >= 0");
        require(c.gravity_run.bin_size >= 1, "gravity_run.bin_size: must be >= 1");
        require(c.gravity_run.interrogation_time > 0.0,
                "gravity_run.interrogation_time: must be positive");
        require(c.gravity_run.response == "simulated" || c.gravity_run.response == "sinusoid",
                "gravity_run.response: expected 'simulated' or 'sinusoid'");
        require(c.gravity_run.contrast > 0.0 && c.gravity_run.contrast <= 1.0,
                "gravity_run.contrast: must lie in (0, 1]");
        require(c.allan.per_decade >= 1, "allan.per_decade: must be >= 1");
    } else if (command == "allan") {
        require(c.allan.shot_period > 0.0, "allan.shot_period: must be positive");
        require(c.allan.per_decade >= 1, "allan.per_decade: must be >= 1");
        if (!c.allan.input) require(c.allan.shots >= 2, "allan.shots: need at least 2");
        for (double t : c.allan.tau) require(t > 0.0, "allan.tau: values must be positive");
    } else if (command == "calibrate") {
    } else {
        throw ConfigError("unknown subcommand '" + command + "'");
    }
}

}  // namespace cli
