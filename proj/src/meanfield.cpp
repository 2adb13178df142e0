#include "dicke/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "dicke/errors.hpp"
#include "dicke/parallel.hpp"

namespace dicke::meanfield {

namespace {

constexpr cplx I{0.0, 1.0};

double transverse_norm(const Vector5& v)
{
    return v.head<4>().squaredNorm();
}

double a2_of(const Vector5& v)
{
    return v(0) * v(0) + v(1) * v(1);
}

ode::Options to_options(const MeanFieldSpec& spec)
{
    ode::Options opt;
    opt.method = spec.method;
    opt.rel_tol = spec.rel_tol;
    opt.abs_tol = spec.abs_tol;
    opt.dt_initial = spec.dt_initial;
    opt.dt_max = spec.dt_max;
    opt.dt_min = 1e-14;
    return opt;
}

double auto_horizon(const EffectiveParams& eff)
{
    const double slowest = std::min({eff.kappa > 0.0 ? eff.kappa : 1.0, std::abs(eff.omega0),
                                     std::abs(eff.lower_state_cavity())});
    return 2000.0 / std::max(slowest, 1e-6);
}

double horizon(const EffectiveParams& eff, const BifurcationOptions& opts)
{
    return opts.t_max > 0.0 ? opts.t_max : auto_horizon(eff);
}

} // namespace

MeanFieldState MeanFieldState::seeded(double seed)
{
    if (!(std::abs(seed) < 0.5))
        throw OutsideValidity("seed must be smaller than the spin length 1/2");
    return {cplx{0.0, 0.0}, cplx{seed, 0.0}, -std::sqrt(0.25 - seed * seed)};
}

Vector5 to_vector(const MeanFieldState& s)
{
    Vector5 v;
    v << s.a_c.real(), s.a_c.imag(), s.s_minus.real(), s.s_minus.imag(), s.s_z;
    return v;
}

MeanFieldState from_vector(const Vector5& v)
{
    return {cplx{v(0), v(1)}, cplx{v(2), v(3)}, v(4)};
}

MeanFieldState mean_field_rhs(const MeanFieldState& st, const EffectiveParams& eff)
{
    const cplx a = st.a_c;
    const cplx s = st.s_minus;
    const double z = st.s_z;
    const double lr = eff.lambda_r;
    const double ls = eff.lambda_s;

    MeanFieldState d;
    d.a_c = -I * (eff.omega + eff.delta * z) * a - I * lr * s - I * ls * std::conj(s) - eff.kappa * a;
    d.s_minus = -I * (eff.omega0 + eff.delta * std::norm(a)) * s + 2.0 * I * lr * a * z +
                2.0 * I * ls * std::conj(a) * z;
    // i (x - x*) = -2 Im x
    d.s_z = -2.0 * lr * std::imag(std::conj(a) * s) - 2.0 * ls * std::imag(a * s);
    return d;
}

Vector5 mean_field_rhs(const Vector5& state, const EffectiveParams& eff)
{
    return to_vector(mean_field_rhs(from_vector(state), eff));
}

Matrix5 numeric_jacobian(const MeanFieldState& state, const EffectiveParams& eff, double step)
{
    const Vector5 x = to_vector(state);
    Matrix5 jac;
    for (int k = 0; k < 5; ++k) {
        Vector5 xp = x, xm = x;
        xp(k) += step;
        xm(k) -= step;
        jac.col(k) = (mean_field_rhs(xp, eff) - mean_field_rhs(xm, eff)) / (2.0 * step);
    }
    return jac;
}

double normal_state_growth_rate(const EffectiveParams& eff)
{
    const Matrix5 jac = numeric_jacobian(MeanFieldState::normal(), eff);
    const Eigen::Matrix4d block = jac.topLeftCorner<4, 4>();
    return Eigen::EigenSolver<Eigen::Matrix4d>(block, false).eigenvalues().real().maxCoeff();
}

EffectiveParams with_coupling(const EffectiveParams& eff, double lambda)
{
    EffectiveParams out = eff;
    const double mean = eff.dicke_coupling();
    if (mean == 0.0) {
        out.lambda_r = lambda;
        out.lambda_s = lambda;
    } else {
        out.lambda_r = eff.lambda_r * lambda / mean;
        out.lambda_s = eff.lambda_s * lambda / mean;
    }
    return out;
}

void MeanFieldSpec::validate() const
{
    if (!(t_final > 0.0))
        throw OutsideValidity("mean field: t_final must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw OutsideValidity("mean field: tolerances must be positive");
    if (sample_interval < 0.0)
        throw OutsideValidity("mean field: sample_interval must be non-negative");
}

MeanFieldSeries integrate_mean_field(const MeanFieldState& state0, const EffectiveParams& eff,
                                     const MeanFieldSpec& spec, const StopPredicate& stop)
{
    return integrate_mean_field(state0, Drive([&eff](double) { return eff; }), spec, stop);
}

MeanFieldSeries integrate_mean_field(const MeanFieldState& state0, const Drive& drive,
                                     const MeanFieldSpec& spec, const StopPredicate& stop)
{
    spec.validate();
    const double ell0 = state0.spin_length();
    if (ell0 > 0.25 + 1e-12)
        throw OutsideValidity("initial spin length exceeds 1/4");

    const ode::Options opt = to_options(spec);
    MeanFieldSeries out;
    Vector5 y = to_vector(state0);
    out.times.push_back(0.0);
    out.states.push_back(state0);

    auto rhs = [&drive](double t, const Vector5& v) { return mean_field_rhs(v, drive(t)); };
    auto observe = [&](double t, const Vector5& v) {
        const auto s = from_vector(v);
        if (ell0 > 0.0)
            out.max_spin_drift = std::max(out.max_spin_drift, std::abs(s.spin_length() - ell0) / ell0);
        return stop && stop(t, s);
    };

    double dt = spec.dt_initial;
    const double interval = spec.sample_interval > 0.0 ? spec.sample_interval : spec.t_final;
    double t = 0.0;
    for (long k = 1; t < spec.t_final; ++k) {
        const double t_next = std::min(spec.t_final, static_cast<double>(k) * interval);
        const auto st = ode::integrate(rhs, t, t_next, y, dt, opt, ode::NoProjection{}, observe);
        out.stats.accepted += st.accepted;
        out.stats.rejected += st.rejected;
        out.stats.rhs_evals += st.rhs_evals;
        t = st.t;
        out.times.push_back(t);
        out.states.push_back(from_vector(y));
        if (st.stopped) {
            out.stopped = true;
            out.stop_time = t;
            break;
        }
    }
    out.stats.t = t;
    out.stats.stopped = out.stopped;
    return out;
}

bool grows_from_seed(const EffectiveParams& eff, const BifurcationOptions& opts)
{
    const double t_max = horizon(eff, opts);
    const ode::Options opt = to_options(opts.integrator);
    Vector5 y = to_vector(MeanFieldState::seeded(opts.seed));
    const double norm0 = transverse_norm(y);

    enum class Verdict { open, grows, decays };
    Verdict verdict = Verdict::open;
    auto observe = [&](double, const Vector5& v) {
        if (a2_of(v) > opts.floor)
            verdict = Verdict::grows;
        else if (transverse_norm(v) < 1e-8 * norm0)
            verdict = Verdict::decays;
        return verdict != Verdict::open;
    };
    auto rhs = [&eff](double, const Vector5& v) { return mean_field_rhs(v, eff); };

    // Past the transients the slowest mode dominates; compare the two halves.
    double dt = opt.dt_initial;
    ode::integrate(rhs, 0.0, 0.5 * t_max, y, dt, opt, ode::NoProjection{}, observe);
    if (verdict != Verdict::open)
        return verdict == Verdict::grows;
    const double mid = transverse_norm(y);
    ode::integrate(rhs, 0.5 * t_max, t_max, y, dt, opt, ode::NoProjection{}, observe);
    if (verdict != Verdict::open)
        return verdict == Verdict::grows;
    return transverse_norm(y) > mid;
}

double refine_threshold(const EffectiveParams& eff_base, double lo, double hi,
                        const BifurcationOptions& opts)
{
    if (!(hi > lo) || !(lo > 0.0))
        throw OutsideValidity("threshold bracket must satisfy 0 < lo < hi");
    while ((hi - lo) > opts.bisection_width * hi) {
        const double mid = 0.5 * (lo + hi);
        if (grows_from_seed(with_coupling(eff_base, mid), opts))
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

MeanFieldState steady_state(const EffectiveParams& eff, const BifurcationOptions& opts)
{
    const double t_max = horizon(eff, opts);
    const ode::Options opt = to_options(opts.integrator);
    Vector5 y = to_vector(MeanFieldState::seeded(opts.seed));
    auto rhs = [&eff](double, const Vector5& v) { return mean_field_rhs(v, eff); };

    const double chunk = t_max / 100.0;
    double dt = opt.dt_initial;
    for (double t = 0.0; t < t_max; t += chunk) {
        ode::integrate(rhs, t, t + chunk, y, dt, opt);
        if (mean_field_rhs(y, eff).cwiseAbs().maxCoeff() < opts.stationary_tol)
            return from_vector(y);
    }
    throw NonStationary("mean field did not become stationary within t = " + std::to_string(t_max) +
                        " us (|d/dt| = " +
                        std::to_string(mean_field_rhs(y, eff).cwiseAbs().maxCoeff()) + ")");
}

BifurcationScan bifurcation_scan(const EffectiveParams& eff_base, const std::vector<double>& lambdas,
                                 const BifurcationOptions& opts)
{
    if (lambdas.empty())
        throw OutsideValidity("bifurcation scan needs a nonempty coupling grid");
    if (!std::is_sorted(lambdas.begin(), lambdas.end()))
        throw OutsideValidity("bifurcation scan grid must be sorted ascending");

    BifurcationScan scan;
    scan.points = parallel_map(lambdas.size(), [&](std::size_t i) {
        BifurcationPoint p;
        p.lambda = lambdas[i];
        const EffectiveParams eff = with_coupling(eff_base, p.lambda);
        p.superradiant = grows_from_seed(eff, opts);
        try {
            const auto st = steady_state(eff, opts);
            p.a2 = std::norm(st.a_c);
            p.s_z = st.s_z;
        } catch (const NonStationary& e) {
            p.stationary = false;
            p.note = e.what();
        }
        return p;
    });

    for (std::size_t i = 0; i < scan.points.size(); ++i) {
        if (!scan.points[i].superradiant)
            continue;
        if (i > 0 && scan.points[i - 1].lambda > 0.0)
            scan.threshold = refine_threshold(eff_base, scan.points[i - 1].lambda, scan.points[i].lambda, opts);
        break;
    }
    return scan;
}

EffectiveParams PowerModel::at_power(double total_power) const
{
    if (total_power < 0.0)
        throw NegativePower("total power must be non-negative");
    if (!(split > 0.0 && split <= 1.0))
        throw OutsideValidity("power split must lie in (0, 1]");
    params::PhysicalConfig c = cfg;
    const double p_first = both_beams ? split * total_power : total_power;
    const double p_second = both_beams ? (1.0 - split) * total_power : 0.0;
    c.rabi_r = params::rabi_from_power(p_first, calib);
    c.rabi_s = params::rabi_from_power(p_second, calib);

    std::optional<double> stark;
    if (stark_shift) {
        const double per_beam = both_beams ? 0.5 * total_power : total_power;
        stark = *stark_shift * per_beam / stark_power;
    }
    EffectiveParams eff = params::effective_params(c, stark);
    eff.lambda_r *= coupling_scale;
    eff.lambda_s *= coupling_scale;
    return eff;
}

void RampProtocol::validate() const
{
    if (!(p_start >= 0.0))
        throw NegativePower("ramp start power must be non-negative");
    if (!(p_end > p_start))
        throw OutsideValidity("ramp end power must exceed the start power");
    if (!(duration > 0.0))
        throw OutsideValidity("ramp duration must be positive");
}

double RampProtocol::power(double t) const
{
    return p_start + (p_end - p_start) * t / duration;
}

RampResult ramp_experiment(const PowerModel& model, const RampProtocol& ramp,
                           const DetectionCriterion& detector, const RampOptions& opts)
{
    ramp.validate();
    if (!(detector.photons > 0.0))
        throw OutsideValidity("detection photon number must be positive");

    const long n_lambda = model.at_power(ramp.p_start).n_lambda;
    const double nl = static_cast<double>(n_lambda);
    const ode::Options opt = to_options(opts.integrator);

    RampResult res;
    Vector5 y = to_vector(MeanFieldState::seeded(opts.seed));
    auto sample = [&](double t) {
        const double p = ramp.power(t);
        const double a2 = a2_of(y);
        res.series.push_back({t, p, model.at_power(p).dicke_coupling(), a2, y(4), nl * a2});
    };
    sample(0.0);

    auto rhs = [&](double t, const Vector5& v) { return mean_field_rhs(v, model.at_power(ramp.power(t))); };

    double t_prev = 0.0;
    double n_prev = nl * a2_of(y);
    auto observe = [&](double t, const Vector5& v) {
        const double n = nl * a2_of(v);
        if (!res.threshold.detected && n >= detector.photons) {
            // Linear interpolation of the crossing inside the last step.
            const double frac = n > n_prev ? (detector.photons - n_prev) / (n - n_prev) : 1.0;
            const double tc = t_prev + std::clamp(frac, 0.0, 1.0) * (t - t_prev);
            res.threshold.detected = true;
            res.threshold.detection_time = tc;
            res.threshold.p_threshold = ramp.power(tc);
            res.threshold.lambda_at_threshold = model.at_power(res.threshold.p_threshold).dicke_coupling();
            if (opts.stop_at_detection)
                return true;
        }
        t_prev = t;
        n_prev = n;
        return false;
    };

    double dt = opt.dt_initial;
    const double interval = opts.sample_interval > 0.0 ? opts.sample_interval : ramp.duration;
    double t = 0.0;
    for (long k = 1; t < ramp.duration; ++k) {
        const double t_next = std::min(ramp.duration, static_cast<double>(k) * interval);
        const auto st = ode::integrate(rhs, t, t_next, y, dt, opt, ode::NoProjection{}, observe);
        t = st.t;
        sample(t);
        if (st.stopped)
            break;
    }

    if (!res.threshold.detected)
        throw NotDetected("ramp " + std::to_string(ramp.p_start) + " -> " + std::to_string(ramp.p_end) +
                          " mW ended with " + std::to_string(nl * a2_of(y)) + " photons, below " +
                          std::to_string(detector.photons));
    return res;
}

double static_threshold_power(const PowerModel& model, double p_lo, double p_hi)
{
    auto excess = [&model](double p) {
        const EffectiveParams eff = model.at_power(p);
        return std::abs(eff.dicke_coupling()) - params::critical_coupling(eff);
    };
    const double f_lo = excess(p_lo);
    const double f_hi = excess(p_hi);
    if (f_lo == 0.0)
        return p_lo;
    if (f_hi == 0.0)
        return p_hi;
    if ((f_lo > 0.0) == (f_hi > 0.0))
        throw NotDetected("critical coupling is not crossed between " + std::to_string(p_lo) + " and " +
                          std::to_string(p_hi) + " mW");
    std::uintmax_t iters = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(excess, p_lo, p_hi, f_lo, f_hi,
                                                          boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (a + b);
}

std::vector<ThresholdMapRow> threshold_map(const PowerModel& model, const std::vector<long>& atom_numbers,
                                           const RampProtocol& ramp, const DetectionCriterion& detector,
                                           const ThresholdMapOptions& opts)
{
    if (atom_numbers.empty())
        throw OutsideValidity("threshold map needs a nonempty atom-number grid");
    ramp.validate();

    return parallel_map(atom_numbers.size(), [&](std::size_t i) {
        ThresholdMapRow row;
        row.n_total = atom_numbers[i];
        PowerModel m = model;
        m.cfg.n_total = row.n_total;
        auto note = [&row](const std::string& what, const std::exception& e) {
            if (!row.note.empty())
                row.note += "; ";
            row.note += what + ": " + e.what();
        };
        try {
            row.omega_d = params::dispersive_shift(static_cast<double>(row.n_total), m.cfg);
        } catch (const Error& e) {
            note("dispersive shift", e);
            return row;
        }

        try {
            row.p_static = static_threshold_power(m, ramp.p_start, ramp.p_end);
            row.lambda_static = std::abs(m.at_power(row.p_static).dicke_coupling());
        } catch (const Error& e) {
            note("static", e);
        }

        auto banded = [&](double scale, std::optional<double> stark, const char* what) {
            PowerModel b = m;
            b.coupling_scale *= scale;
            if (stark)
                b.stark_shift = *stark;
            try {
                return static_threshold_power(b, ramp.p_start, ramp.p_end);
            } catch (const Error& e) {
                note(what, e);
                return std::numeric_limits<double>::quiet_NaN();
            }
        };
        row.p_static_high = banded(opts.band_high, std::nullopt, "band high");
        row.p_static_low = banded(opts.band_low, std::nullopt, "band low");
        row.p_static_no_stark = banded(1.0, 0.0, "no Stark");

        try {
            row.ramp = ramp_experiment(m, ramp, detector, opts.ramp).threshold;
        } catch (const Error& e) {
            note("ramp", e);
        }

        if (opts.cross_check && std::isfinite(row.p_static)) {
            try {
                const EffectiveParams eff = m.at_power(row.p_static);
                const double lc = params::critical_coupling(eff);
                row.lambda_scan = refine_threshold(eff, 0.8 * lc, 1.25 * lc, opts.bifurcation);
            } catch (const Error& e) {
                note("cross-check", e);
            }
        }
        return row;
    });
}

} // namespace dicke::meanfield
