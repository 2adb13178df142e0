#pragma once

#include <vector>

#include <Eigen/SparseCore>

#include "dicke/hilbert.hpp"
#include "dicke/ode.hpp"
#include "dicke/params.hpp"

// Dissipative dynamics drho/dt = -i[H, rho] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a)
// on the composite cavity (x) spin space.
namespace dicke::lindblad {

using hilbert::DensityMatrix;
using hilbert::Operator;
using SparseMatrix = Eigen::SparseMatrix<hilbert::cplx, Eigen::ColMajor, int>;

// Default limit on the population of the highest retained Fock level.
inline constexpr double default_truncation_limit = 1e-4;

struct ProbeConfig
{
    double eta_p = 0.0;    // coherent drive amplitude
    double delta_p = 0.0;  // probe detuning from the bare cavity resonance
};

struct EvolveSpec
{
    double t_final = 0.0;
    double dt_initial = 1e-3;
    double rel_tol = 1e-9;
    double abs_tol = 1e-12;
    ode::Method method = ode::Method::dormand_prince;
    double dt_max = 1.0;
    // Spacing of returned samples; 0 returns only the initial and final state.
    double sample_interval = 0.0;
    double truncation_limit = default_truncation_limit;

    void validate() const;
};

struct EvolveResult
{
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double max_trace_drift = 0.0;
    double min_eigenvalue = 0.0;  // smallest eigenvalue over all samples
    ode::Stats stats;
};

// -i[H, rho] + kappa (2 a rho a^dag - a^dag a rho - rho a^dag a), with `a` the
// cavity annihilation operator lifted to H's space.
hilbert::Matrix liouvillian_apply(const Operator& h, double kappa, const DensityMatrix& rho);
hilbert::Matrix liouvillian_apply(const Operator& h, double kappa, const hilbert::Matrix& rho);

// Column-stacked superoperator: vec(L rho) = L vec(rho) with vec stacking
// columns of rho.
SparseMatrix liouvillian_matrix(const Operator& h, double kappa);

EvolveResult evolve(const DensityMatrix& rho0, const Operator& h, double kappa,
                    const EvolveSpec& spec);

struct SteadyStateOptions
{
    double residual_tol = 1e-9;
    int refinement_steps = 3;
    double truncation_limit = default_truncation_limit;
};

// Solves L(rho) = 0 with tr(rho) = 1 by sparse LU on the vectorised
// Liouvillian, the trace condition replacing the first row. Throws
// SingularLiouvillian if the stationary state is not unique and
// TruncationError if the top Fock level is populated above the limit.
DensityMatrix steady_state(const Operator& h, double kappa, const SteadyStateOptions& opts = {});

// Residual max-norm of L(rho).
double steady_state_residual(const Operator& h, double kappa, const DensityMatrix& rho);

// H_TC in the frame rotating with the probe plus eta_p (a + a^dag). The probe
// at Delta_p from the bare cavity appears at eff.empty_cavity + Delta_p in the
// model frame, and rotating by that frequency times (a^dag a + J_z) leaves
// omega_cav - f and omega0 - f on the diagonal. Only valid for the
// excitation-conserving Tavis-Cummings form.
Operator probe_frame_hamiltonian(const params::EffectiveParams& eff, const ProbeConfig& probe,
                                 const hilbert::FockSpace& fock, const hilbert::SpinSpace& spin);

struct TransmissionPoint
{
    double delta_p = 0.0;
    double n_ss = 0.0;
    double normalized = 0.0;  // n_ss / n_empty at the empty-cavity peak
};

// Steady-state photon number across a probe grid. The spin space may be far
// smaller than eff.n_lambda: the collective coupling lambda_r is kept, which
// is exact in the weak-probe (single excitation) limit.
std::vector<TransmissionPoint> transmission_scan(const params::EffectiveParams& eff,
                                                 const std::vector<double>& probe_grid,
                                                 double eta_p, const hilbert::FockSpace& fock,
                                                 const hilbert::SpinSpace& spin,
                                                 const SteadyStateOptions& opts = {});

// Peak photon number of the empty cavity under the same drive, eta_p^2/kappa^2.
double empty_cavity_peak(double eta_p, double kappa);

} // namespace dicke::lindblad
