#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <type_traits>

#include "dicke/errors.hpp"

// Explicit Runge-Kutta integrators shared by the density-matrix and the
// mean-field solvers. `State` is any Eigen dense type (real or complex,
// vector or matrix); the right-hand side is called as f(t, y) -> State.
namespace dicke::ode {

enum class Method
{
    rk4_fixed,
    dormand_prince,
};

struct Options
{
    Method method = Method::dormand_prince;
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double dt_initial = 1e-3;
    double dt_max = std::numeric_limits<double>::infinity();
    double dt_min = 1e-12;
    long max_steps = 100'000'000;
};

struct Stats
{
    double t = 0.0;
    long accepted = 0;
    long rejected = 0;
    long rhs_evals = 0;
    bool stopped = false;  // the observer asked to stop
};

struct NoProjection
{
    template <class State>
    void operator()(State&) const {}
};

struct NoObserver
{
    template <class State>
    bool operator()(double, const State&) const { return false; }
};

namespace detail {

template <class State>
double error_ratio(const State& err, const State& y0, const State& y1, const Options& opt)
{
    const auto scale = opt.abs_tol + opt.rel_tol * y0.array().abs().max(y1.array().abs());
    return (err.array().abs() / scale).maxCoeff();
}

} // namespace detail

// Integrates y from t0 to t1 in place. `dt` carries the step size in and out
// so that consecutive segments continue smoothly. After each accepted step
// `project(y)` may regularise the state and `observe(t, y)` may return true
// to stop early. Throws StepSizeUnderflow when the adaptive step collapses.
template <class State, class Rhs, class Projection = NoProjection, class Observer = NoObserver>
Stats integrate(Rhs&& f, double t0, double t1, State& y, double& dt, const Options& opt,
                Projection&& project = {}, Observer&& observe = {})
{
    Stats st;
    st.t = t0;
    if (!(t1 > t0))
        return st;
    if (!(dt > 0.0))
        dt = opt.dt_initial;

    const double span_eps = 1e-12 * std::max(1.0, std::abs(t1));

    if (opt.method == Method::rk4_fixed) {
        const double h0 = opt.dt_initial;
        double t = t0;
        while (t1 - t > span_eps) {
            if (++st.accepted > opt.max_steps)
                throw StepSizeUnderflow("fixed-step integration exceeded the step budget");
            const double h = std::min(h0, t1 - t);
            const State k1 = f(t, y);
            const State k2 = f(t + 0.5 * h, (y + (0.5 * h) * k1).eval());
            const State k3 = f(t + 0.5 * h, (y + (0.5 * h) * k2).eval());
            const State k4 = f(t + h, (y + h * k3).eval());
            st.rhs_evals += 4;
            y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            t += h;
            project(y);
            st.t = t;
            if (observe(t, static_cast<const State&>(y))) {
                st.stopped = true;
                return st;
            }
        }
        st.t = t1;
        return st;
    }

    // Dormand-Prince 5(4), first-same-as-last.
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                     b6 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    double t = t0;
    State k1 = f(t, y);
    ++st.rhs_evals;
    long steps = 0;
    while (t1 - t > span_eps) {
        if (++steps > opt.max_steps)
            throw StepSizeUnderflow("adaptive integration exceeded the step budget");
        double h = std::min({dt, opt.dt_max, t1 - t});
        if (h < opt.dt_min && h < t1 - t)
            throw StepSizeUnderflow("step size fell below " + std::to_string(opt.dt_min) +
                                    " at t = " + std::to_string(t));

        const State k2 = f(t + c2 * h, (y + h * (a21 * k1)).eval());
        const State k3 = f(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
        const State k4 = f(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
        const State k5 =
            f(t + c5 * h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
        const State k6 =
            f(t + h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());
        State y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        State k7 = f(t + h, y_new);
        st.rhs_evals += 6;

        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double ratio = detail::error_ratio(err, y, y_new, opt);

        if (!(ratio <= 1.0)) {
            ++st.rejected;
            const double shrink = std::isfinite(ratio) ? std::max(0.2, 0.9 * std::pow(ratio, -0.2)) : 0.2;
            dt = h * shrink;
            if (dt < opt.dt_min)
                throw StepSizeUnderflow("step size fell below " + std::to_string(opt.dt_min) +
                                        " at t = " + std::to_string(t));
            continue;
        }

        ++st.accepted;
        t += h;
        y = std::move(y_new);
        const double grow = ratio > 0.0 ? std::min(5.0, 0.9 * std::pow(ratio, -0.2)) : 5.0;
        // A step trimmed to hit t1 or dt_max says nothing against the larger
        // proposal, so keep it for the next segment.
        dt = h < dt ? std::max(dt, h * grow) : h * grow;
        if constexpr (std::is_same_v<std::decay_t<Projection>, NoProjection>) {
            k1 = std::move(k7);
        } else {
            project(y);
            k1 = f(t, y);
            ++st.rhs_evals;
        }
        st.t = t;
        if (observe(t, static_cast<const State&>(y))) {
            st.stopped = true;
            return st;
        }
    }
    st.t = t1;
    return st;
}

} // namespace dicke::ode
