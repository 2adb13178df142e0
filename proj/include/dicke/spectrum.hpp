#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "dicke/hilbert.hpp"
#include "dicke/lindblad.hpp"
#include "dicke/params.hpp"

// Single-excitation spectrum of the Tavis-Cummings model and normal-mode
// splitting extracted from transmission scans.
namespace dicke::spectrum {

struct NormalModes
{
    double lower = 0.0;
    double upper = 0.0;

    double splitting() const { return upper - lower; }
};

// Eigenvalues of [[omega_cav, lambda_r], [lambda_r, omega0]].
NormalModes tc_normal_modes(double omega_cav, double omega0, double lambda_r);

struct AvoidedCrossing
{
    std::vector<std::pair<double, double>> branch_lower;  // (omega_cav, E)
    std::vector<std::pair<double, double>> branch_upper;
    double splitting_min = 0.0;
};

AvoidedCrossing avoided_crossing(const std::vector<double>& omega_cav_grid, double omega0,
                                 double lambda_r);

struct SplittingFit
{
    double peak1 = 0.0;  // lower center
    double peak2 = 0.0;  // upper center
    double splitting = 0.0;
    double width = 0.0;  // shared HWHM
    double amplitude1 = 0.0;
    double amplitude2 = 0.0;
    double residual = 0.0;  // rms of the fit, in units of the input
};

// Least-squares fit of two Lorentzians with a shared width, seeded at
// `width_seed` (HWHM) and the two highest local maxima. Throws FitDegenerate
// when fewer than two maxima exist or the centers sit closer than one FWHM.
SplittingFit splitting_from_scan(std::vector<std::pair<double, double>> scan, double width_seed);
SplittingFit splitting_from_scan(const std::vector<lindblad::TransmissionPoint>& scan, double width_seed);

struct CrossingMapOptions
{
    double bin_width = units::kHz(10.0);  // dispersive-shift bins
    double eta_p = 0.0;                   // 0 picks n_empty = 0.01
    int n_max = 4;
    long spin_atoms = 1;                  // simulated spin size N_lambda
    // Holds the Raman coupling at this value for every atom number instead of
    // letting it scale with sqrt(N_lambda).
    std::optional<double> fixed_lambda_r;
    lindblad::SteadyStateOptions steady{};
};

struct CrossingBin
{
    double center = 0.0;     // dispersive shift
    int traces = 0;          // atom numbers averaged into this bin
    double omega0 = 0.0;     // bare spin line in probe detuning
    double cavity = 0.0;     // bare cavity line in probe detuning
    NormalModes branches;    // coupled lines in probe detuning
    std::vector<double> transmission;
};

struct CrossingMap
{
    std::vector<double> probe_grid;
    std::vector<CrossingBin> bins;  // ascending center
};

// Normalised steady-state transmission versus probe detuning for each atom
// number of the grid (0 gives the empty cavity), averaged in dispersive-shift
// bins. `cfg` fixes the Raman drive; only n_total is varied. `stark_shift`
// optionally replaces the evaluated differential Stark shift.
CrossingMap crossing_map(const params::PhysicalConfig& cfg, const std::vector<long>& atom_numbers,
                         const std::vector<double>& probe_grid, const CrossingMapOptions& opts = {},
                         std::optional<double> stark_shift = std::nullopt);

// Effective parameters for `cfg` with `atoms` trapped atoms; atoms = 0 gives
// the empty cavity (no coupling, bare frequency).
params::EffectiveParams effective_for_atoms(const params::PhysicalConfig& cfg, long atoms,
                                            std::optional<double> stark_shift = std::nullopt);

// Probe detuning of a model-frame frequency.
inline double to_probe_detuning(const params::EffectiveParams& eff, double model_frequency)
{
    return model_frequency - eff.empty_cavity;
}

} // namespace dicke::spectrum
