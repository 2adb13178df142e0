#include "dicke/params.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dicke/errors.hpp"

namespace dicke::params {

namespace {

double checked(double denom, double floor, const char* what)
{
    if (!(std::abs(denom) >= floor))
        throw DegenerateDetuning(std::string(what) + " = " + std::to_string(units::to_MHz(denom)) +
                                 " MHz is below the detuning floor");
    return denom;
}

} // namespace

void PhysicalConfig::validate() const
{
    auto require = [](bool ok, const char* msg) {
        if (!ok)
            throw OutsideValidity(msg);
    };
    require(g > 0, "g must be positive");
    require(kappa > 0, "kappa must be positive");
    require(gamma > 0, "gamma must be positive");
    require(omega_hf > 0, "omega_hf must be positive");
    require(omega_z > 0, "omega_Z must be positive");
    require(n_total >= 1, "N_total must be at least 1");
    require(alpha > 0 && alpha <= 1, "alpha must lie in (0, 1]");
    require(beta > 0 && beta <= 1, "beta must lie in (0, 1]");
    require(f_lambda > 0 && f_lambda <= 1, "f_lambda must lie in (0, 1]");
}

long PhysicalConfig::coupled_atoms() const
{
    return std::max(1L, std::lround(f_lambda * static_cast<double>(n_total)));
}

RamanDetunings derive_detunings(const PhysicalConfig& cfg)
{
    // omega_r = omega_c + eta - omega_hf - zeta,  Delta_r = omega_r + omega_1 - omega_a
    // omega_s = omega_c + eta + omega_hf + zeta,  Delta_s = omega_s - omega_a
    return {cfg.delta_c + cfg.eta - cfg.zeta - 3.0 * cfg.omega_z,
            cfg.delta_c + cfg.eta + cfg.omega_hf + cfg.zeta};
}

double differential_stark_shift(const PhysicalConfig& cfg, double floor)
{
    const auto [dr, ds] = derive_detunings(cfg);
    const double dr1 = checked(dr - cfg.qubit_splitting(), floor, "Delta_r - omega_1");
    checked(dr, floor, "Delta_r");
    checked(ds, floor, "Delta_s");

    const double wr2 = cfg.rabi_r * cfg.rabi_r;
    const double ws2 = cfg.rabi_s * cfg.rabi_s;
    return (wr2 / dr + ws2 / dr1 - (ws2 / ds + wr2 / dr1)) / 6.0;
}

EffectiveParams effective_params(const PhysicalConfig& cfg, std::optional<double> stark_shift,
                                 double floor)
{
    cfg.validate();
    const auto [dr, ds] = derive_detunings(cfg);
    checked(dr, floor, "Delta_r");
    checked(ds, floor, "Delta_s");

    const double n = static_cast<double>(cfg.n_total);
    const long n_lambda = cfg.coupled_atoms();
    const double nl = static_cast<double>(n_lambda);
    const double n_bar = n - nl;
    const double g2 = cfg.g * cfg.g;

    EffectiveParams eff;
    eff.delta_r = dr;
    eff.delta_s = ds;
    eff.n_lambda = n_lambda;
    eff.kappa = cfg.kappa;
    eff.empty_cavity = -cfg.eta;
    eff.omega = cfg.alpha / 3.0 * n * (g2 / ds + g2 / dr) -
                cfg.alpha / 3.0 * n_bar * (g2 / ds - g2 / dr) - cfg.eta;
    eff.delta = cfg.alpha * 2.0 / 3.0 * nl * (g2 / ds - g2 / dr);
    eff.omega_ds = stark_shift ? *stark_shift : differential_stark_shift(cfg, floor);
    eff.omega0 = eff.omega_ds - (cfg.omega_hf + cfg.zeta - cfg.qubit_splitting());

    const double prefactor = cfg.beta * std::sqrt(3.0) / 12.0 * std::sqrt(nl) * cfg.g;
    eff.lambda_r = prefactor * cfg.rabi_r / dr;
    eff.lambda_s = prefactor * cfg.rabi_s / ds;
    return eff;
}

double critical_coupling(double omega0, double lower_state_cavity, double kappa)
{
    if (omega0 == 0.0 || lower_state_cavity == 0.0 ||
        std::signbit(omega0) != std::signbit(lower_state_cavity))
        throw OutsideValidity("critical coupling needs omega0 and omega - delta/2 nonzero with equal sign");
    // A global sign flip of the Hamiltonian maps the model onto itself, so
    // only the magnitudes matter.
    const double w0 = std::abs(omega0);
    const double w = std::abs(lower_state_cavity);
    return 0.5 * std::sqrt(w0 / w * (kappa * kappa + w * w));
}

double critical_coupling(const EffectiveParams& eff)
{
    return critical_coupling(eff.omega0, eff.lower_state_cavity(), eff.kappa);
}

double dispersive_shift(double atoms, const PhysicalConfig& cfg, double floor)
{
    const double dr = checked(derive_detunings(cfg).r, floor, "Delta_r");
    return cfg.alpha * 2.0 / 3.0 * atoms * cfg.g * cfg.g / dr;
}

long atoms_from_shift(double omega_d, const PhysicalConfig& cfg, double floor)
{
    const double per_atom = dispersive_shift(1.0, cfg, floor);
    if (omega_d == 0.0)
        return 0;
    if (std::signbit(omega_d) != std::signbit(per_atom))
        throw SignMismatch("dispersive shift and Delta_r have opposite signs");
    return std::lround(omega_d / per_atom);
}

double rabi_from_power(double power_mw, const PowerCalibration& calib)
{
    if (power_mw < 0.0)
        throw NegativePower("beam power must be non-negative");
    return calib.c_rabi * std::sqrt(power_mw);
}

PowerCalibration calibrate_power(const PhysicalConfig& cfg, double lambda_r_target,
                                 double power_mw, double omega_d)
{
    if (power_mw <= 0.0)
        throw NegativePower("calibration power must be positive");
    PhysicalConfig anchor = cfg;
    anchor.n_total = atoms_from_shift(omega_d, cfg);
    anchor.rabi_r = 1.0;
    anchor.rabi_s = 0.0;
    // lambda_r is linear in Omega_r; evaluate the slope at unit Rabi frequency.
    const double slope = std::abs(effective_params(anchor).lambda_r);
    return {std::abs(lambda_r_target) / (slope * std::sqrt(power_mw))};
}

double scattering_rate_estimate(const PhysicalConfig& cfg, double floor)
{
    const auto [dr, ds] = derive_detunings(cfg);
    checked(dr, floor, "Delta_r");
    checked(ds, floor, "Delta_s");
    const double per_us = 2.0 * cfg.gamma *
                          (cfg.rabi_r * cfg.rabi_r / (4.0 * dr * dr) +
                           cfg.rabi_s * cfg.rabi_s / (4.0 * ds * ds));
    return units::per_us_to_per_ms(per_us);
}

} // namespace dicke::params
