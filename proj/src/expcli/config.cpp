#include "dicke/expcli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dicke/errors.hpp"

namespace dicke::expcli {

namespace {

struct KeySpec
{
    Dimension dimension;
    bool list = false;
    bool scoped = false;  // may carry a tc./dicke. prefix
};

const std::map<std::string, KeySpec>& schema()
{
    using D = Dimension;
    static const std::map<std::string, KeySpec> table = {
        {"g", {D::frequency, false, true}},
        {"kappa", {D::frequency, false, true}},
        {"gamma", {D::frequency, false, true}},
        {"Delta_c", {D::frequency, false, true}},
        {"omega_hf", {D::frequency, false, true}},
        {"omega_Z", {D::frequency, false, true}},
        {"eta", {D::frequency, false, true}},
        {"zeta", {D::frequency, false, true}},
        {"alpha", {D::dimensionless, false, true}},
        {"beta", {D::dimensionless, false, true}},
        {"f_lambda", {D::dimensionless, false, true}},
        {"N_total", {D::integer, false, true}},
        {"omega_d", {D::frequency, false, true}},
        {"power_per_beam", {D::power, false, true}},
        {"stark_shift", {D::frequency, false, true}},
        {"stark_power", {D::power, false, true}},

        {"calibration.lambda_r", {D::frequency}},
        {"calibration.power", {D::power}},
        {"calibration.omega_d", {D::frequency}},

        {"ramp.P_start", {D::power}},
        {"ramp.P_end", {D::power}},
        {"ramp.duration", {D::time}},
        {"ramp.split", {D::dimensionless}},
        {"ramp.seed", {D::dimensionless}},
        {"ramp.sample_interval", {D::time}},
        {"ramp.stop_at_detection", {D::boolean}},
        {"ramp.dt_max", {D::time}},

        {"detector.photons", {D::dimensionless}},
        {"detector.counts", {D::dimensionless}},
        {"detector.efficiency", {D::dimensionless}},
        {"detector.bin", {D::time}},

        {"threshold_map.omega_d", {D::frequency, true}},
        {"threshold_map.N_total", {D::integer, true}},
        {"threshold_map.band_high", {D::dimensionless}},
        {"threshold_map.band_low", {D::dimensionless}},
        {"threshold_map.cross_check", {D::boolean}},

        {"transmission.probe", {D::frequency, true}},
        {"transmission.n_max", {D::integer}},
        {"transmission.spin_atoms", {D::integer}},
        {"transmission.probe_photons", {D::dimensionless}},

        {"splitting_map.omega_d", {D::frequency, true}},
        {"splitting_map.N_total", {D::integer, true}},
        {"splitting_map.probe", {D::frequency, true}},
        {"splitting_map.bin", {D::frequency}},
        {"splitting_map.n_max", {D::integer}},
        {"splitting_map.spin_atoms", {D::integer}},
        {"splitting_map.fixed_coupling", {D::boolean}},

        {"quantum.n_lambda", {D::integer}},
        {"quantum.n_max", {D::integer}},
        {"quantum.omega", {D::frequency}},
        {"quantum.omega0", {D::frequency}},
        {"quantum.kappa", {D::frequency}},
        {"quantum.delta", {D::frequency}},
        {"quantum.above", {D::dimensionless}},
        {"quantum.below", {D::dimensionless}},
        {"quantum.agreement", {D::dimensionless}},
        {"quantum.fault", {D::text}},
    };
    return table;
}

const std::vector<std::string> scopes = {"tc", "dicke"};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string base_key(const std::string& key)
{
    for (const auto& sc : scopes) {
        const std::string prefix = sc + ".";
        if (key.rfind(prefix, 0) == 0) {
            const std::string rest = key.substr(prefix.size());
            auto it = schema().find(rest);
            if (it != schema().end() && it->second.scoped)
                return rest;
        }
    }
    return key;
}

struct UnitScale
{
    Dimension dimension;
    double scale;
};

const std::map<std::string, UnitScale>& unit_table()
{
    using D = Dimension;
    static const std::map<std::string, UnitScale> table = {
        {"Hz", {D::frequency, units::Hz(1.0)}},
        {"kHz", {D::frequency, units::kHz(1.0)}},
        {"MHz", {D::frequency, units::MHz(1.0)}},
        {"GHz", {D::frequency, units::GHz(1.0)}},
        {"rad/s", {D::frequency, 1e-6}},
        {"rad/ms", {D::frequency, 1e-3}},
        {"rad/us", {D::frequency, 1.0}},
        {"ns", {D::time, 1e-3}},
        {"us", {D::time, 1.0}},
        {"ms", {D::time, 1e3}},
        {"s", {D::time, 1e6}},
        {"uW", {D::power, 1e-3}},
        {"mW", {D::power, 1.0}},
        {"W", {D::power, 1e3}},
    };
    return table;
}

const char* dimension_name(Dimension d)
{
    switch (d) {
    case Dimension::frequency: return "a frequency";
    case Dimension::time: return "a time";
    case Dimension::power: return "a power";
    case Dimension::dimensionless: return "a plain number";
    case Dimension::integer: return "an integer";
    case Dimension::boolean: return "true/false";
    case Dimension::text: return "text";
    }
    return "?";
}

std::vector<std::string> split_commas(const std::string& s)
{
    std::vector<std::string> parts;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        parts.push_back(trim(cur));
    return parts;
}

} // namespace

double parse_quantity(const std::string& text, Dimension expected, const std::string& key, int line)
{
    const std::string t = trim(text);
    if (t.empty())
        throw ConfigError("empty value", key, line);

    double value = 0.0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    if (*first == '+')
        ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first)
        throw ConfigError("expected a number, got \"" + t + "\"", key, line);
    const std::string unit = trim(std::string(ptr, last));

    if (expected == Dimension::integer) {
        if (!unit.empty() || value != std::floor(value))
            throw ConfigError("expected an integer, got \"" + t + "\"", key, line);
        return value;
    }
    if (expected == Dimension::dimensionless) {
        if (!unit.empty())
            throw ConfigError("expected a plain number without unit, got unit \"" + unit + "\"", key, line);
        return value;
    }
    if (unit.empty())
        throw ConfigError(std::string("missing unit; expected ") + dimension_name(expected), key, line);
    const auto it = unit_table().find(unit);
    if (it == unit_table().end())
        throw ConfigError("unknown unit \"" + unit + "\"", key, line);
    if (it->second.dimension != expected)
        throw ConfigError("unit \"" + unit + "\" is not " + dimension_name(expected), key, line);
    return value * it->second.scale;
}

std::vector<double> parse_list(const std::string& text, Dimension expected, const std::string& key, int line)
{
    std::string t = trim(text);
    if (t.rfind("linspace(", 0) == 0) {
        if (t.back() != ')')
            throw ConfigError("unterminated linspace(...)", key, line);
        const auto args = split_commas(t.substr(9, t.size() - 10));
        if (args.size() != 3)
            throw ConfigError("linspace takes (start, stop, count)", key, line);
        const double a = parse_quantity(args[0], expected, key, line);
        const double b = parse_quantity(args[1], expected, key, line);
        const double n = parse_quantity(args[2], Dimension::integer, key, line);
        if (n < 1)
            throw ConfigError("linspace count must be at least 1", key, line);
        std::vector<double> out;
        const long count = static_cast<long>(n);
        for (long i = 0; i < count; ++i)
            out.push_back(count == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
        return out;
    }
    if (!t.empty() && t.front() == '[') {
        if (t.back() != ']')
            throw ConfigError("unterminated list", key, line);
        t = t.substr(1, t.size() - 2);
    }
    std::vector<double> out;
    for (const auto& part : split_commas(t))
        out.push_back(parse_quantity(part, expected, key, line));
    if (out.empty())
        throw ConfigError("empty list", key, line);
    return out;
}

Dimension key_dimension(const std::string& key, int line)
{
    const auto it = schema().find(base_key(key));
    if (it == schema().end())
        throw ConfigError("unknown key", key, line);
    if (base_key(key) != key && !it->second.scoped)
        throw ConfigError("key cannot be scoped", key, line);
    return it->second.dimension;
}

bool key_is_list(const std::string& key)
{
    const auto it = schema().find(base_key(key));
    return it != schema().end() && it->second.list;
}

ConfigFile ConfigFile::parse(const std::string& text, const std::string& origin)
{
    ConfigFile cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty())
            continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", {}, line);
        const std::string key = trim(s.substr(0, eq));
        if (key.empty())
            throw ConfigError("missing key before '='", {}, line);
        if (cfg.entries_.count(key))
            throw ConfigError("duplicate key (first set on line " +
                                  std::to_string(cfg.entries_.at(key).line) + ")",
                              key, line);
        cfg.insert(key, trim(s.substr(eq + 1)), line);
    }
    return cfg;
}

ConfigFile ConfigFile::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str(), path);
}

void ConfigFile::set(const std::string& assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override must look like key=value: " + assignment);
    insert(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)), 0);
}

void ConfigFile::insert(const std::string& key, const std::string& value, int line)
{
    const Dimension dim = key_dimension(key, line);
    // Validate eagerly so that errors carry the line of the offending entry.
    if (key_is_list(key)) {
        parse_list(value, dim, key, line);
    } else if (dim == Dimension::boolean) {
        if (value != "true" && value != "false")
            throw ConfigError("expected true or false", key, line);
    } else if (dim != Dimension::text) {
        parse_quantity(value, dim, key, line);
    }
    entries_[key] = {value, line};
}

bool ConfigFile::has(const std::string& key) const
{
    return entries_.count(key) != 0;
}

std::string ConfigFile::resolved_key(const std::string& key, const std::string& scope) const
{
    if (!scope.empty()) {
        const std::string scoped = scope + "." + key;
        if (entries_.count(scoped))
            return scoped;
    }
    return key;
}

std::optional<std::string> ConfigFile::find(const std::string& key, const std::string& scope) const
{
    const auto it = entries_.find(resolved_key(key, scope));
    if (it == entries_.end())
        return std::nullopt;
    return it->second.raw;
}

const Entry& ConfigFile::entry(const std::string& key, const std::string& scope) const
{
    const std::string k = resolved_key(key, scope);
    const auto it = entries_.find(k);
    if (it == entries_.end())
        throw ConfigError("required key missing", scope.empty() ? key : scope + "." + key);
    return it->second;
}

double ConfigFile::number(const std::string& key, const std::string& scope) const
{
    const Entry& e = entry(key, scope);
    const std::string k = resolved_key(key, scope);
    return parse_quantity(e.raw, key_dimension(k), k, e.line);
}

double ConfigFile::number_or(const std::string& key, double fallback, const std::string& scope) const
{
    return entries_.count(resolved_key(key, scope)) ? number(key, scope) : fallback;
}

long ConfigFile::integer(const std::string& key, const std::string& scope) const
{
    return std::lround(number(key, scope));
}

long ConfigFile::integer_or(const std::string& key, long fallback, const std::string& scope) const
{
    return entries_.count(resolved_key(key, scope)) ? integer(key, scope) : fallback;
}

bool ConfigFile::boolean_or(const std::string& key, bool fallback, const std::string& scope) const
{
    const auto v = find(key, scope);
    return v ? *v == "true" : fallback;
}

std::string ConfigFile::text_or(const std::string& key, const std::string& fallback) const
{
    const auto v = find(key);
    return v ? *v : fallback;
}

std::vector<double> ConfigFile::list(const std::string& key) const
{
    const Entry& e = entry(key, {});
    return parse_list(e.raw, key_dimension(key), key, e.line);
}

Experiment parse_experiment(const std::string& name)
{
    static const std::map<std::string, Experiment> names = {
        {"params", Experiment::params},
        {"splitting-map", Experiment::splitting_map},
        {"transmission", Experiment::transmission},
        {"ramp", Experiment::ramp},
        {"threshold-map", Experiment::threshold_map},
        {"quantum-check", Experiment::quantum_check},
    };
    const auto it = names.find(name);
    if (it == names.end())
        throw ConfigError("unknown experiment " + name);
    return it->second;
}

std::string experiment_name(Experiment e)
{
    switch (e) {
    case Experiment::params: return "params";
    case Experiment::splitting_map: return "splitting-map";
    case Experiment::transmission: return "transmission";
    case Experiment::ramp: return "ramp";
    case Experiment::threshold_map: return "threshold-map";
    case Experiment::quantum_check: return "quantum-check";
    }
    return "?";
}

meanfield::PowerModel ScenarioConfig::power_model() const
{
    meanfield::PowerModel m;
    m.cfg = dicke;
    m.calib = calibration;
    m.split = ramp_split;
    m.stark_shift = dicke_stark;
    m.stark_power = dicke_stark_power;
    return m;
}

namespace {

params::PhysicalConfig physical(const ConfigFile& f, const std::string& scope)
{
    params::PhysicalConfig c;
    c.g = f.number("g", scope);
    c.kappa = f.number("kappa", scope);
    c.gamma = f.number("gamma", scope);
    c.delta_c = f.number("Delta_c", scope);
    c.omega_hf = f.number("omega_hf", scope);
    c.omega_z = f.number("omega_Z", scope);
    c.eta = f.number_or("eta", 0.0, scope);
    c.zeta = f.number_or("zeta", 0.0, scope);
    c.alpha = f.number_or("alpha", c.alpha, scope);
    c.beta = f.number_or("beta", c.beta, scope);
    c.f_lambda = f.number_or("f_lambda", c.f_lambda, scope);
    if (f.find("N_total", scope)) {
        c.n_total = f.integer("N_total", scope);
    } else if (f.find("omega_d", scope)) {
        c.n_total = params::atoms_from_shift(f.number("omega_d", scope), c);
    } else {
        throw ConfigError("set either N_total or omega_d", scope + ".N_total");
    }
    c.validate();
    return c;
}

std::vector<long> atom_grid(const ConfigFile& f, const std::string& prefix, const params::PhysicalConfig& c)
{
    std::vector<long> atoms;
    if (f.has(prefix + ".N_total")) {
        for (double v : f.list(prefix + ".N_total"))
            atoms.push_back(std::lround(v));
    } else if (f.has(prefix + ".omega_d")) {
        for (double w : f.list(prefix + ".omega_d"))
            atoms.push_back(params::atoms_from_shift(w, c));
    }
    return atoms;
}

std::vector<double> linspace(double a, double b, int n)
{
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(a + (b - a) * i / (n - 1));
    return out;
}

} // namespace

ScenarioConfig build_scenario(const ConfigFile& f, Experiment experiment)
{
    ScenarioConfig s;
    s.experiment = experiment;

    if (experiment == Experiment::quantum_check) {
        auto& q = s.quantum;
        q.n_lambda = f.integer_or("quantum.n_lambda", q.n_lambda);
        q.n_max = static_cast<int>(f.integer_or("quantum.n_max", q.n_max));
        q.omega = f.number_or("quantum.omega", q.omega);
        q.omega0 = f.number_or("quantum.omega0", q.omega0);
        q.kappa = f.number_or("quantum.kappa", q.kappa);
        q.delta = f.number_or("quantum.delta", q.delta);
        q.above = f.number_or("quantum.above", q.above);
        q.below = f.number_or("quantum.below", q.below);
        q.agreement = f.number_or("quantum.agreement", q.agreement);
        q.fault = f.text_or("quantum.fault", "");
        if (q.n_lambda < 1 || q.n_lambda > 8)
            throw ConfigError("quantum check is limited to 1..8 atoms", "quantum.n_lambda");
        if (q.n_max < 1 || q.n_max > 20)
            throw ConfigError("quantum check is limited to n_max <= 20", "quantum.n_max");
        if (q.kappa < 0.0)
            throw ConfigError("kappa must be non-negative", "quantum.kappa");
        if (!q.fault.empty() && q.fault != "omega0_sign")
            throw ConfigError("unknown fault \"" + q.fault + "\"", "quantum.fault");
        return s;
    }

    s.tc = physical(f, "tc");
    s.dicke = physical(f, "dicke");

    s.calibration_lambda_r = f.number("calibration.lambda_r");
    const double cal_power = f.number("calibration.power");
    const double cal_omega_d = f.number("calibration.omega_d");
    s.calibration = params::calibrate_power(s.tc, s.calibration_lambda_r, cal_power, cal_omega_d);

    s.tc.rabi_r = params::rabi_from_power(f.number_or("power_per_beam", cal_power, "tc"), s.calibration);
    s.tc.rabi_s = 0.0;
    const double dicke_power = f.number_or("power_per_beam", cal_power, "dicke");
    s.power_per_beam = dicke_power;
    s.dicke.rabi_r = params::rabi_from_power(dicke_power, s.calibration);
    s.dicke.rabi_s = s.dicke.rabi_r;
    if (f.find("stark_shift", "tc"))
        s.tc_stark = f.number("stark_shift", "tc");
    if (f.find("stark_shift", "dicke")) {
        const double power = f.number_or("stark_power", dicke_power, "dicke");
        if (!(power > 0.0))
            throw ConfigError("stark_power must be positive", "dicke.stark_power");
        // Quoted at `power`; dicke.rabi_* sit at dicke_power.
        s.dicke_stark_power = power;
        s.dicke_stark = f.number("stark_shift", "dicke");
    }

    s.ramp.p_start = f.number_or("ramp.P_start", 3.6);
    s.ramp.p_end = f.number_or("ramp.P_end", 36.0);
    s.ramp.duration = f.number_or("ramp.duration", units::ms(1.0));
    s.ramp_split = f.number_or("ramp.split", 0.5);
    s.ramp_options.seed = f.number_or("ramp.seed", meanfield::default_seed);
    s.ramp_options.sample_interval = f.number_or("ramp.sample_interval", 1.0);
    s.ramp_options.stop_at_detection = f.boolean_or("ramp.stop_at_detection", false);
    s.ramp_options.integrator.dt_max = f.number_or("ramp.dt_max", s.ramp_options.integrator.dt_max);

    s.detector.photons = f.number_or("detector.photons", 10.0);
    s.counts_bin = f.number_or("detector.bin", 5.0);
    if (f.has("detector.efficiency")) {
        s.detection_efficiency = f.number("detector.efficiency");
    } else {
        const double counts = f.number_or("detector.counts", 7.8);
        s.detection_efficiency = counts / (2.0 * s.dicke.kappa * s.detector.photons * s.counts_bin);
    }
    if (!(s.detection_efficiency > 0.0 && s.detection_efficiency <= 1.0))
        throw ConfigError("detection efficiency must lie in (0, 1]", "detector.efficiency");
    if (!(s.counts_bin > 0.0))
        throw ConfigError("bin must be positive", "detector.bin");

    s.threshold_atoms = atom_grid(f, "threshold_map", s.dicke);
    s.band_high = f.number_or("threshold_map.band_high", s.band_high);
    s.band_low = f.number_or("threshold_map.band_low", s.band_low);
    s.cross_check = f.boolean_or("threshold_map.cross_check", true);

    s.transmission_probe = f.has("transmission.probe") ? f.list("transmission.probe")
                                                       : linspace(units::MHz(-1.2), units::MHz(1.2), 241);
    s.transmission_n_max = static_cast<int>(f.integer_or("transmission.n_max", s.transmission_n_max));
    s.transmission_spin_atoms = f.integer_or("transmission.spin_atoms", s.transmission_spin_atoms);
    s.probe_photons = f.number_or("transmission.probe_photons", s.probe_photons);

    s.map_atoms = atom_grid(f, "splitting_map", s.tc);
    s.map_probe = f.has("splitting_map.probe") ? f.list("splitting_map.probe")
                                               : linspace(units::MHz(-1.5), units::MHz(1.5), 121);
    s.map_bin = f.number_or("splitting_map.bin", s.map_bin);
    s.map_n_max = static_cast<int>(f.integer_or("splitting_map.n_max", s.map_n_max));
    s.map_spin_atoms = f.integer_or("splitting_map.spin_atoms", s.map_spin_atoms);
    s.map_fixed_coupling = f.boolean_or("splitting_map.fixed_coupling", false);

    switch (experiment) {
    case Experiment::ramp:
        s.ramp.validate();
        break;
    case Experiment::threshold_map:
        s.ramp.validate();
        if (s.threshold_atoms.empty())
            throw ConfigError("threshold map needs threshold_map.omega_d or threshold_map.N_total",
                              "threshold_map.omega_d");
        break;
    case Experiment::splitting_map:
        if (s.map_atoms.empty())
            throw ConfigError("splitting map needs splitting_map.omega_d or splitting_map.N_total",
                              "splitting_map.omega_d");
        break;
    default:
        break;
    }
    return s;
}

} // namespace dicke::expcli
