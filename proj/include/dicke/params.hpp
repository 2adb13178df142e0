#pragma once

#include <optional>

#include "dicke/units.hpp"

// Lab parameters of the cavity-assisted Raman scheme and their mapping onto
// the effective open Dicke / Tavis-Cummings model.
//
// All angular frequencies are in rad/us (see units.hpp). Detunings keep their
// algebraic sign: the experiment runs red of the atomic line, so Delta_r,
// Delta_s, the dispersive shift and both Raman couplings come out negative.
namespace dicke::params {

// Smallest detuning magnitude accepted in any denominator.
inline constexpr double default_detuning_floor = units::MHz(1.0);

struct PhysicalConfig
{
    double g = 0.0;         // single-atom coupling (half the vacuum Rabi frequency)
    double kappa = 0.0;     // cavity HWHM
    double gamma = 0.0;     // atomic HWHM
    double delta_c = 0.0;   // cavity - atom detuning
    double omega_hf = 0.0;  // ground-state hyperfine splitting
    double omega_z = 0.0;   // linear Zeeman shift
    double eta = 0.0;       // cavity-frame offset of both Raman beams
    double zeta = 0.0;      // two-photon offset
    double rabi_r = 0.0;    // Raman beam Rabi frequencies, cycling-transition convention
    double rabi_s = 0.0;
    long n_total = 1;       // trapped atoms
    double alpha = 0.66;    // cavity-coupling averaging factor
    double beta = 0.78;     // Raman-coupling averaging factor
    double f_lambda = 1.0 / 3.0;

    // Throws OutsideValidity when an invariant is violated.
    void validate() const;

    // Splitting of the two coupled ground states, omega_hf - 3 omega_Z.
    double qubit_splitting() const { return omega_hf - 3.0 * omega_z; }

    long coupled_atoms() const;
};

struct EffectiveParams
{
    double omega = 0.0;     // cavity frequency in the model frame
    double omega0 = 0.0;    // spin frequency
    double delta = 0.0;     // a^dag a J_z cross term
    double lambda_r = 0.0;
    double lambda_s = 0.0;
    double omega_ds = 0.0;  // differential Stark shift that entered omega0
    double delta_r = 0.0;
    double delta_s = 0.0;
    long n_lambda = 1;
    double kappa = 0.0;
    // Model-frame frequency of the empty cavity (-eta). A probe detuned by
    // Delta_p from the bare cavity sits at empty_cavity + Delta_p here.
    double empty_cavity = 0.0;

    // Cavity frequency with all atoms in the lower state, omega - delta/2.
    // For the single-beam configuration this is omega_d - eta.
    double lower_state_cavity() const { return omega - 0.5 * delta; }

    // Single Dicke coupling used when both beams are on: the mean of the two
    // Raman couplings.
    double dicke_coupling() const { return 0.5 * (lambda_r + lambda_s); }
};

struct PowerCalibration
{
    double c_rabi = 0.0;  // rad/us per sqrt(mW)
};

struct RamanDetunings
{
    double r = 0.0;
    double s = 0.0;
};

RamanDetunings derive_detunings(const PhysicalConfig& cfg);

double differential_stark_shift(const PhysicalConfig& cfg,
                                double floor = default_detuning_floor);

// `stark_shift` replaces the evaluation of the differential Stark shift from
// the Rabi frequencies when given (used to pin omega0 to an externally quoted
// value).
EffectiveParams effective_params(const PhysicalConfig& cfg,
                                 std::optional<double> stark_shift = std::nullopt,
                                 double floor = default_detuning_floor);

// Critical coupling of the open Dicke model. omega0 and the lower-state
// cavity frequency must be nonzero and share a sign; the formula is then
// evaluated on their magnitudes. Throws OutsideValidity otherwise.
double critical_coupling(double omega0, double lower_state_cavity, double kappa);
double critical_coupling(const EffectiveParams& eff);

// Dispersive shift of the bare cavity caused by `atoms` atoms in the lower
// hyperfine manifold.
double dispersive_shift(double atoms, const PhysicalConfig& cfg,
                        double floor = default_detuning_floor);

long atoms_from_shift(double omega_d, const PhysicalConfig& cfg,
                      double floor = default_detuning_floor);

double rabi_from_power(double power_mw, const PowerCalibration& calib);

// Fixes c_rabi so that a beam of `power_mw` produces |lambda_r| =
// `lambda_r_target` with the atom number implied by `omega_d`.
PowerCalibration calibrate_power(const PhysicalConfig& cfg, double lambda_r_target,
                                 double power_mw, double omega_d);

// Far-detuned off-resonant scattering rate per atom, in 1/ms. Order of
// magnitude diagnostic only; it does not enter any equation of motion.
double scattering_rate_estimate(const PhysicalConfig& cfg,
                                double floor = default_detuning_floor);

} // namespace dicke::params
