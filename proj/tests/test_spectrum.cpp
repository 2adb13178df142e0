#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "dicke/errors.hpp"
#include "dicke/spectrum.hpp"

using namespace dicke;
using namespace dicke::spectrum;

namespace {

using Scan = std::vector<std::pair<double, double>>;

double lorentzian(double x, double c, double w) { return 1.0 / (1.0 + (x - c) * (x - c) / (w * w)); }

Scan two_peaks(double c1, double c2, double w, double a1, double a2)
{
    Scan s;
    for (int i = 0; i <= 400; ++i) {
        const double x = -4.0 + 0.02 * i;
        s.emplace_back(x, a1 * lorentzian(x, c1, w) + a2 * lorentzian(x, c2, w));
    }
    return s;
}

} // namespace

TEST_CASE("normal modes of the uncoupled crossing are the bare lines")
{
    const auto m = tc_normal_modes(1.2, -0.4, 0.0);
    CHECK(m.lower == doctest::Approx(-0.4));
    CHECK(m.upper == doctest::Approx(1.2));
}

TEST_CASE("resonant splitting is twice the coupling")
{
    for (const double l : {0.1, -0.35, 2.0}) {
        const auto m = tc_normal_modes(0.7, 0.7, l);
        CHECK(m.splitting() == doctest::Approx(2.0 * std::abs(l)));
    }
}

TEST_CASE("normal modes obey the trace and determinant sum rules")
{
    for (const double wc : {-1.0, 0.2, 3.0}) {
        const auto m = tc_normal_modes(wc, 0.5, 0.3);
        CHECK(m.lower + m.upper == doctest::Approx(wc + 0.5));
        CHECK(m.lower * m.upper == doctest::Approx(wc * 0.5 - 0.09));
        CHECK(m.splitting() >= 0.6 - 1e-12);
    }
}

TEST_CASE("avoided crossing reaches its minimum gap on resonance")
{
    std::vector<double> grid;
    for (int i = 0; i <= 40; ++i)
        grid.push_back(-1.0 + 0.05 * i);
    const auto ac = avoided_crossing(grid, 0.0, 0.2);
    REQUIRE(ac.branch_lower.size() == grid.size());
    CHECK(ac.splitting_min == doctest::Approx(0.4));
}

TEST_CASE("double Lorentzian fit recovers synthetic centers")
{
    const double w = 0.3;
    const auto fit = splitting_from_scan(two_peaks(-1.0, 1.3, w, 1.0, 0.7), 0.5);
    CHECK(std::abs(fit.peak1 + 1.0) < 1e-3 * 2.0 * w);
    CHECK(std::abs(fit.peak2 - 1.3) < 1e-3 * 2.0 * w);
    CHECK(fit.splitting == doctest::Approx(2.3).epsilon(1e-4));
    CHECK(fit.width == doctest::Approx(w).epsilon(1e-3));
}

TEST_CASE("fit is invariant under input order and amplitude scale")
{
    auto scan = two_peaks(-0.8, 0.9, 0.25, 0.6, 1.0);
    const auto ref = splitting_from_scan(scan, 0.3);
    std::reverse(scan.begin(), scan.end());
    const auto rev = splitting_from_scan(scan, 0.3);
    for (auto& p : scan)
        p.second *= 17.0;
    const auto scaled = splitting_from_scan(scan, 0.3);
    CHECK(rev.peak1 == doctest::Approx(ref.peak1).epsilon(1e-9));
    CHECK(rev.peak2 == doctest::Approx(ref.peak2).epsilon(1e-9));
    CHECK(scaled.peak1 == doctest::Approx(ref.peak1).epsilon(1e-7));
    CHECK(scaled.peak2 == doctest::Approx(ref.peak2).epsilon(1e-7));
}

TEST_CASE("single Lorentzian is degenerate")
{
    Scan s;
    for (int i = 0; i <= 200; ++i) {
        const double x = -2.0 + 0.02 * i;
        s.emplace_back(x, lorentzian(x, 0.1, 0.3));
    }
    CHECK_THROWS_AS(splitting_from_scan(s, 0.3), FitDegenerate);
}

TEST_CASE("uncoupled transmission scan is degenerate")
{
    params::EffectiveParams e;
    e.omega = 0.0;
    e.omega0 = 0.2;
    e.kappa = 0.1;
    e.n_lambda = 2;
    std::vector<double> grid;
    for (int i = 0; i <= 80; ++i)
        grid.push_back(-1.0 + 0.025 * i);
    const auto scan = lindblad::transmission_scan(e, grid, 0.01, hilbert::FockSpace(3), hilbert::SpinSpace(2));
    CHECK_THROWS_AS(splitting_from_scan(scan, 0.05), FitDegenerate);
}

TEST_CASE("resonant transmission splits by twice the coupling")
{
    params::EffectiveParams e;
    e.omega = 0.0;
    e.omega0 = 0.0;
    e.lambda_r = 0.5;
    e.kappa = 0.1;
    e.n_lambda = 1000;
    std::vector<double> grid;
    for (int i = 0; i <= 160; ++i)
        grid.push_back(-1.0 + 0.0125 * i);
    const auto scan = lindblad::transmission_scan(e, grid, 0.01, hilbert::FockSpace(3), hilbert::SpinSpace(2));
    const auto fit = splitting_from_scan(scan, 0.1);
    const auto modes = tc_normal_modes(0.0, 0.0, 0.5);
    CHECK(fit.peak1 == doctest::Approx(modes.lower).epsilon(1e-2));
    CHECK(fit.peak2 == doctest::Approx(modes.upper).epsilon(1e-2));
}
