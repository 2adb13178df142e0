#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dicke/meanfield.hpp"
#include "dicke/params.hpp"

// Flat key = value configuration with explicit units.
//
//   # comment
//   Delta_c   = -127 GHz
//   ramp.P_end = 36 mW
//   probe     = linspace(-1.5 MHz, 1.5 MHz, 151)
//   grid      = [-0.2 MHz, -0.5 MHz]
//
// Unit table (converted to the internal rad/us, us, mW):
//   frequency  Hz kHz MHz GHz (cyclic, times 2 pi), rad/s rad/ms rad/us
//   time       ns us ms s
//   power      uW mW W
// Dimensionless, integer, boolean and string keys take no unit. Keys of the
// physical block may be prefixed with a scope ("tc." or "dicke.") to
// override the shared value for experiments running in that scope.
namespace dicke::expcli {

enum class Dimension
{
    frequency,
    time,
    power,
    dimensionless,
    integer,
    boolean,
    text,
};

struct Quantity
{
    double value = 0.0;  // internal units
    Dimension dimension = Dimension::dimensionless;
};

// Parses "number [unit]"; throws ConfigError (with `key`, `line`) on a
// missing number, an unknown unit or a unit of the wrong dimension.
double parse_quantity(const std::string& text, Dimension expected, const std::string& key, int line);

std::vector<double> parse_list(const std::string& text, Dimension expected, const std::string& key, int line);

struct Entry
{
    std::string raw;
    int line = 0;  // 0 for command-line overrides
};

class ConfigFile
{
public:
    static ConfigFile parse(const std::string& text, const std::string& origin = "<string>");
    static ConfigFile load(const std::string& path);

    // Applies "key=value"; the key is checked against the schema.
    void set(const std::string& assignment);

    bool has(const std::string& key) const;
    const std::map<std::string, Entry>& entries() const { return entries_; }
    const std::string& origin() const { return origin_; }

    // Scoped lookup: "scope.key" wins over "key".
    std::optional<std::string> find(const std::string& key, const std::string& scope = {}) const;

    double number(const std::string& key, const std::string& scope = {}) const;
    double number_or(const std::string& key, double fallback, const std::string& scope = {}) const;
    long integer(const std::string& key, const std::string& scope = {}) const;
    long integer_or(const std::string& key, long fallback, const std::string& scope = {}) const;
    bool boolean_or(const std::string& key, bool fallback, const std::string& scope = {}) const;
    std::string text_or(const std::string& key, const std::string& fallback) const;
    std::vector<double> list(const std::string& key) const;

private:
    void insert(const std::string& key, const std::string& value, int line);
    const Entry& entry(const std::string& key, const std::string& scope) const;
    std::string resolved_key(const std::string& key, const std::string& scope) const;

    std::map<std::string, Entry> entries_;
    std::string origin_;
};

// Dimension of a known key (scope prefix stripped); throws ConfigError for
// unknown keys.
Dimension key_dimension(const std::string& key, int line = 0);
bool key_is_list(const std::string& key);

enum class Experiment
{
    params,
    splitting_map,
    transmission,
    ramp,
    threshold_map,
    quantum_check,
};

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

struct QuantumCheckConfig
{
    long n_lambda = 8;
    int n_max = 20;
    double omega = 1.0;
    double omega0 = 1.0;
    double kappa = 1.0;
    double delta = 0.0;
    double above = 1.5;      // coupling in units of the critical coupling
    double below = 0.5;
    double agreement = 0.3;  // relative quantum/mean-field tolerance
    std::string fault;       // "", "omega0_sign"
};

struct ScenarioConfig
{
    Experiment experiment = Experiment::params;
    params::PhysicalConfig tc;     // single-beam scope, Rabi frequency at power_per_beam
    params::PhysicalConfig dicke;  // both beams at power_per_beam
    params::PowerCalibration calibration;
    double calibration_lambda_r = 0.0;
    double power_per_beam = 0.0;
    std::optional<double> tc_stark;
    std::optional<double> dicke_stark;
    double dicke_stark_power = 18.0;

    meanfield::RampProtocol ramp;
    double ramp_split = 0.5;
    meanfield::RampOptions ramp_options;
    meanfield::DetectionCriterion detector;
    double detection_efficiency = 0.0;
    double counts_bin = 5.0;

    std::vector<long> threshold_atoms;
    double band_high = 1.2;
    double band_low = 0.89;
    bool cross_check = true;

    std::vector<double> transmission_probe;
    int transmission_n_max = 12;
    long transmission_spin_atoms = 2;
    double probe_photons = 0.01;  // empty-cavity peak photon number

    std::vector<long> map_atoms;
    std::vector<double> map_probe;
    double map_bin = units::kHz(10.0);
    int map_n_max = 4;
    long map_spin_atoms = 1;
    bool map_fixed_coupling = false;

    QuantumCheckConfig quantum;

    meanfield::PowerModel power_model() const;
};

// Builds and validates the scenario. Throws ConfigError for missing or
// inconsistent keys and passes through model validation errors.
ScenarioConfig build_scenario(const ConfigFile& file, Experiment experiment);

} // namespace dicke::expcli
