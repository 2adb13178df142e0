#pragma once

#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dicke/ode.hpp"
#include "dicke/params.hpp"

// Semiclassical limit of the open Dicke model. Operator products are
// factorised into products of expectation values, with the scaled moments
//   a_c = <a>/sqrt(N_lambda),  s = <J_->/N_lambda,  s_z = <J_z>/N_lambda.
//
// Heisenberg equations for H with cavity decay kappa, after factorisation:
//   da_c/dt = -i (omega + delta s_z) a_c - i lambda_r s - i lambda_s s* - kappa a_c
//   ds/dt   = -i (omega0 + delta |a_c|^2) s + 2i lambda_r a_c s_z + 2i lambda_s a_c* s_z
//   ds_z/dt = i lambda_r (a_c* s - a_c s*) + i lambda_s (a_c s - a_c* s*)
// The spin has no dissipation, so |s|^2 + s_z^2 is conserved.
namespace dicke::meanfield {

using cplx = std::complex<double>;
using params::EffectiveParams;

inline constexpr double default_seed = 1e-4;

struct MeanFieldState
{
    cplx a_c{0.0, 0.0};
    cplx s_minus{0.0, 0.0};
    double s_z = -0.5;

    double spin_length() const { return std::norm(s_minus) + s_z * s_z; }
    double photons(long n_lambda) const { return static_cast<double>(n_lambda) * std::norm(a_c); }

    // All spins down, empty cavity: a fixed point for every parameter set.
    static MeanFieldState normal() { return {}; }
    // Normal state tilted so that s_minus = seed while keeping the spin length 1/4.
    static MeanFieldState seeded(double seed = default_seed);
};

using Vector5 = Eigen::Matrix<double, 5, 1>;
using Matrix5 = Eigen::Matrix<double, 5, 5>;

// Real layout (Re a_c, Im a_c, Re s, Im s, s_z) used by the integrators.
Vector5 to_vector(const MeanFieldState& s);
MeanFieldState from_vector(const Vector5& v);

MeanFieldState mean_field_rhs(const MeanFieldState& state, const EffectiveParams& eff);
Vector5 mean_field_rhs(const Vector5& state, const EffectiveParams& eff);

// Central-difference Jacobian of the real flow.
Matrix5 numeric_jacobian(const MeanFieldState& state, const EffectiveParams& eff, double step = 1e-7);

// Largest real part among the eigenvalues of the linearised flow around the
// normal state. s_z only enters at second order there, so the 4x4 block of
// transverse fluctuations is used. Positive means the normal state is unstable.
double normal_state_growth_rate(const EffectiveParams& eff);

// Copy of eff with the two Raman couplings rescaled (keeping their ratio) so
// that their mean is `lambda`. If both are zero they are set to lambda.
EffectiveParams with_coupling(const EffectiveParams& eff, double lambda);

struct MeanFieldSpec
{
    double t_final = 0.0;
    double rel_tol = 1e-10;
    // Tiny absolute tolerance: near the normal state the amplitudes of
    // interest are many orders below one.
    double abs_tol = 1e-40;
    double dt_initial = 1e-3;
    double dt_max = 0.2;
    ode::Method method = ode::Method::dormand_prince;
    double sample_interval = 0.0;  // 0 keeps only the initial and final states

    void validate() const;
};

using Drive = std::function<EffectiveParams(double t)>;
using StopPredicate = std::function<bool(double t, const MeanFieldState&)>;

struct MeanFieldSeries
{
    std::vector<double> times;
    std::vector<MeanFieldState> states;
    double max_spin_drift = 0.0;  // relative to the initial spin length
    bool stopped = false;
    double stop_time = std::numeric_limits<double>::quiet_NaN();
    ode::Stats stats;
};

MeanFieldSeries integrate_mean_field(const MeanFieldState& state0, const EffectiveParams& eff,
                                     const MeanFieldSpec& spec, const StopPredicate& stop = {});
MeanFieldSeries integrate_mean_field(const MeanFieldState& state0, const Drive& drive,
                                     const MeanFieldSpec& spec, const StopPredicate& stop = {});

struct BifurcationOptions
{
    double seed = default_seed;
    double floor = 1e-6;           // |a_c|^2 above which a point counts as superradiant
    double bisection_width = 1e-3; // relative
    double t_max = 0.0;            // 0 picks a horizon from the slowest bare rate
    double stationary_tol = 1e-8;  // max |d state/dt| accepted as steady
    MeanFieldSpec integrator{};
};

struct BifurcationPoint
{
    double lambda = 0.0;
    double a2 = 0.0;     // steady |a_c|^2
    double s_z = -0.5;
    bool superradiant = false;
    bool stationary = true;
    std::string note;    // NonStationary message, if any
};

struct BifurcationScan
{
    std::vector<BifurcationPoint> points;
    std::optional<double> threshold;  // bisection-refined
};

// Long-time states across an ascending grid of Dicke couplings.
BifurcationScan bifurcation_scan(const EffectiveParams& eff_base, const std::vector<double>& lambdas,
                                 const BifurcationOptions& opts = {});

// Whether the seeded normal state runs away from the normal state at this eff.
bool grows_from_seed(const EffectiveParams& eff, const BifurcationOptions& opts = {});

// Bisection of grows_from_seed in the coupling between lo (normal) and hi
// (superradiant) down to the relative width in opts.
double refine_threshold(const EffectiveParams& eff_base, double lo, double hi,
                        const BifurcationOptions& opts = {});

// Integrates from the seed until the flow is stationary. Throws NonStationary.
MeanFieldState steady_state(const EffectiveParams& eff, const BifurcationOptions& opts = {});

// Maps total Raman power (mW) onto effective parameters.
struct PowerModel
{
    params::PhysicalConfig cfg;
    params::PowerCalibration calib;
    double split = 0.5;  // fraction of the total power in the first beam
    bool both_beams = true;
    // Optional fixed differential Stark shift quoted at `stark_power` mW per
    // beam; scaled linearly with the per-beam power.
    std::optional<double> stark_shift;
    double stark_power = 18.0;
    double coupling_scale = 1.0;  // multiplies both Raman couplings

    EffectiveParams at_power(double total_power) const;
};

struct RampProtocol
{
    double p_start = 0.0;  // mW, total
    double p_end = 0.0;
    double duration = 0.0; // us

    void validate() const;
    double power(double t) const;
};

struct DetectionCriterion
{
    double photons = 10.0;
};

struct ThresholdResult
{
    double p_threshold = std::numeric_limits<double>::quiet_NaN();
    double lambda_at_threshold = std::numeric_limits<double>::quiet_NaN();
    double detection_time = std::numeric_limits<double>::quiet_NaN();
    bool detected = false;
};

struct RampSample
{
    double t = 0.0;
    double power = 0.0;
    double lambda = 0.0;
    double a2 = 0.0;
    double s_z = 0.0;
    double photons = 0.0;
};

struct RampOptions
{
    double seed = default_seed;
    double sample_interval = 1.0;  // us
    bool stop_at_detection = true;
    MeanFieldSpec integrator{};
};

struct RampResult
{
    ThresholdResult threshold;
    std::vector<RampSample> series;
};

// Linear power ramp with couplings and Stark shift recomputed from P(t).
// Throws NotDetected if the photon number never reaches the criterion.
RampResult ramp_experiment(const PowerModel& model, const RampProtocol& ramp,
                           const DetectionCriterion& detector, const RampOptions& opts = {});

// Total power where the mean Dicke coupling equals the critical coupling,
// bracketed in [p_lo, p_hi]. Throws NotDetected if no sign change.
double static_threshold_power(const PowerModel& model, double p_lo, double p_hi);

struct ThresholdMapRow
{
    long n_total = 0;
    double omega_d = 0.0;
    double p_static = std::numeric_limits<double>::quiet_NaN();
    double lambda_static = std::numeric_limits<double>::quiet_NaN();
    double p_static_high = std::numeric_limits<double>::quiet_NaN();  // couplings x band_high
    double p_static_low = std::numeric_limits<double>::quiet_NaN();   // couplings x band_low
    double p_static_no_stark = std::numeric_limits<double>::quiet_NaN();
    double lambda_scan = std::numeric_limits<double>::quiet_NaN();    // bifurcation cross-check
    ThresholdResult ramp;
    std::string note;
};

struct ThresholdMapOptions
{
    double band_high = 1.2;
    double band_low = 0.89;
    bool cross_check = true;
    RampOptions ramp{};
    BifurcationOptions bifurcation{};
};

// Dynamic and static thresholds across atom numbers. Per-point failures are
// recorded in `note` and the scan continues.
std::vector<ThresholdMapRow> threshold_map(const PowerModel& model, const std::vector<long>& atom_numbers,
                                           const RampProtocol& ramp, const DetectionCriterion& detector,
                                           const ThresholdMapOptions& opts = {});

} // namespace dicke::meanfield
