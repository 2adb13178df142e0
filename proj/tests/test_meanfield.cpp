#include "doctest.h"

#include <cmath>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/meanfield.hpp"
#include "fixtures.hpp"

using namespace dicke;
using namespace dicke::meanfield;

namespace {

EffectiveParams model(double omega, double omega0, double kappa, double delta = 0.0)
{
    EffectiveParams e;
    e.omega = omega;
    e.omega0 = omega0;
    e.kappa = kappa;
    e.delta = delta;
    e.n_lambda = 1000;
    return e;
}

double state_distance(const MeanFieldState& a, const MeanFieldState& b)
{
    return (to_vector(a) - to_vector(b)).cwiseAbs().maxCoeff();
}

} // namespace

TEST_CASE("normal state is stationary")
{
    auto e = with_coupling(model(1.0, 0.8, 0.3, 0.2), 2.0);
    CHECK(to_vector(mean_field_rhs(MeanFieldState::normal(), e)).norm() == 0.0);
}

TEST_CASE("uncoupled flow rotates and damps the field")
{
    const auto e = model(1.3, 0.7, 0.25);
    MeanFieldState s;
    s.a_c = {0.2, 0.1};
    s.s_minus = {0.3, 0.0};
    s.s_z = -std::sqrt(0.25 - 0.09);
    const auto d = mean_field_rhs(s, e);
    CHECK(std::abs(d.a_c - cplx(-0.25, -1.3) * s.a_c) < 1e-15);
    CHECK(std::abs(d.s_minus - cplx(0.0, -0.7) * s.s_minus) < 1e-15);
    CHECK(d.s_z == 0.0);
}

TEST_CASE("coupling rescaling keeps the ratio")
{
    auto e = model(1.0, 1.0, 0.1);
    e.lambda_r = -0.9;
    e.lambda_s = -1.1;
    const auto r = with_coupling(e, 0.5);
    CHECK(r.dicke_coupling() == doctest::Approx(0.5));
    CHECK(r.lambda_s / r.lambda_r == doctest::Approx(1.1 / 0.9));
}

TEST_CASE("linear stability changes sign at the critical coupling")
{
    for (const double w0 : {0.3, 1.0, 1.9})
        for (const double w : {0.2, 0.9, 1.6})
            for (const double k : {0.05, 0.4}) {
                const auto e = model(w, w0, k);
                const double lc = params::critical_coupling(e);
                CHECK(normal_state_growth_rate(with_coupling(e, 0.995 * lc)) < 0.0);
                CHECK(normal_state_growth_rate(with_coupling(e, 1.005 * lc)) > 0.0);
            }
}

TEST_CASE("lossless resonant threshold sits at half the frequency")
{
    const auto e = model(1.0, 1.0, 0.0);
    CHECK(params::critical_coupling(e) == doctest::Approx(0.5));
    CHECK(normal_state_growth_rate(with_coupling(e, 0.49)) < 1e-6);
    CHECK(normal_state_growth_rate(with_coupling(e, 0.51)) > 1e-2);
}

TEST_CASE("bisection refines the bifurcation onto the critical coupling")
{
    const auto e = model(0.8, 1.2, 0.2);
    const double lc = params::critical_coupling(e);
    const double found = refine_threshold(e, 0.5 * lc, 1.5 * lc);
    CHECK(std::abs(found / lc - 1.0) < 1e-2);
}

TEST_CASE("flow commutes with the parity mirror")
{
    const auto e = with_coupling(model(1.0, 0.7, 0.2, 0.1), 1.0);
    const auto s0 = MeanFieldState::seeded(1e-3);
    auto m0 = s0;
    m0.a_c = -m0.a_c;
    m0.s_minus = -m0.s_minus;
    MeanFieldSpec spec;
    spec.t_final = 60.0;
    spec.sample_interval = 5.0;
    const auto a = integrate_mean_field(s0, e, spec);
    const auto b = integrate_mean_field(m0, e, spec);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(std::abs(a.states[i].a_c + b.states[i].a_c) < 1e-12);
        CHECK(std::abs(a.states[i].s_minus + b.states[i].s_minus) < 1e-12);
        CHECK(std::abs(a.states[i].s_z - b.states[i].s_z) < 1e-12);
    }
}

TEST_CASE("spin length is conserved")
{
    const auto e0 = model(1.0, 1.0, 1.0, 0.3);
    const auto e = with_coupling(e0, 1.5 * params::critical_coupling(e0));
    MeanFieldSpec spec;
    spec.t_final = 200.0;
    const auto r = integrate_mean_field(MeanFieldState::seeded(0.05), e, spec);
    CHECK(r.max_spin_drift < 1e-8);
}

TEST_CASE("order parameter vanishes continuously at threshold")
{
    const auto e = model(1.0, 0.6, 0.5);
    const double lc = params::critical_coupling(e);
    std::vector<double> eps{0.02, 0.05, 0.1}, a2;
    for (const double x : eps)
        a2.push_back(std::norm(steady_state(with_coupling(e, lc * (1.0 + x))).a_c));
    for (std::size_t i = 1; i < eps.size(); ++i) {
        const double slope = std::log(a2[i] / a2[i - 1]) / std::log(eps[i] / eps[i - 1]);
        CHECK(slope == doctest::Approx(1.0).epsilon(0.15));
    }
    CHECK(a2.front() < 0.05);
    CHECK(std::norm(steady_state(with_coupling(e, 0.9 * lc)).a_c) < 1e-10);
}

TEST_CASE("bifurcation scan classifies both sides")
{
    const auto e = model(1.0, 1.0, 0.5);
    const double lc = params::critical_coupling(e);
    const auto scan = bifurcation_scan(e, {0.5 * lc, 0.9 * lc, 1.1 * lc, 1.5 * lc});
    REQUIRE(scan.points.size() == 4);
    CHECK_FALSE(scan.points[0].superradiant);
    CHECK_FALSE(scan.points[1].superradiant);
    CHECK(scan.points[2].superradiant);
    CHECK(scan.points[3].superradiant);
    REQUIRE(scan.threshold);
    CHECK(*scan.threshold == doctest::Approx(lc).epsilon(1e-2));
}

TEST_CASE("ramp detection lags the static threshold")
{
    const auto& s = testing::lab_scenario();
    const auto pm = s.power_model();
    const double p_static = static_threshold_power(pm, s.ramp.p_start, s.ramp.p_end);
    const auto r = ramp_experiment(pm, s.ramp, s.detector);
    REQUIRE(r.threshold.detected);
    CHECK(r.threshold.p_threshold > p_static);
    CHECK(r.threshold.p_threshold < s.ramp.p_end);
}

TEST_CASE("ramp and power model errors")
{
    const auto& s = testing::lab_scenario();
    const auto pm = s.power_model();
    CHECK(pm.at_power(0.0).lambda_r == 0.0);
    CHECK_THROWS_AS(pm.at_power(-1.0), NegativePower);
    CHECK_THROWS_AS(static_threshold_power(pm, 0.1, 1.0), NotDetected);
    RampProtocol bad{1.0, 2.0, 0.0};
    CHECK_THROWS_AS(bad.validate(), OutsideValidity);
    RampProtocol weak{0.1, 1.0, 100.0};
    CHECK_THROWS_AS(ramp_experiment(pm, weak, s.detector), NotDetected);
}

TEST_CASE("integration rejects invalid specs")
{
    MeanFieldSpec spec;
    CHECK_THROWS_AS(spec.validate(), OutsideValidity);
    spec.t_final = 1.0;
    const auto r = integrate_mean_field(MeanFieldState::seeded(), model(1.0, 1.0, 0.1), spec);
    CHECK(r.times.back() == doctest::Approx(1.0));
    CHECK(state_distance(r.states.front(), MeanFieldState::seeded()) == 0.0);
}
