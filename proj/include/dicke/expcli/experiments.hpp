#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dicke/expcli/config.hpp"
#include "dicke/expcli/output.hpp"

namespace dicke::expcli {

inline constexpr const char* version = "0.1.0";

enum ExitCode : int
{
    exit_ok = 0,
    exit_config = 1,
    exit_runtime = 2,
    exit_check_failed = 3,
};

// Mean detected counts per bin for intracavity photon number n: the output
// flux 2 kappa n times the efficiency and the bin length.
double counts_model(double photons, double efficiency, double bin, double kappa);
std::vector<double> counts_model(const std::vector<double>& photons, double efficiency, double bin,
                                 double kappa);

struct CheckResult
{
    std::string id;
    double measured = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;
};

// Runs the cross-validation battery; never throws for a failed check.
std::vector<CheckResult> quantum_check(const QuantumCheckConfig& cfg);

// Executes one experiment and fills the record's data files and summary.
// Human-readable progress and results go to `log`.
RunRecord run_experiment(const ScenarioConfig& scenario, std::ostream& log);

struct RunRequest
{
    std::string experiment;
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_dir;
    std::vector<std::string> command;
};

// Parses, runs and writes the record. Returns an ExitCode; errors are
// reported on `err`.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

} // namespace dicke::expcli
