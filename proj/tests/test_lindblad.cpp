#include "doctest.h"

#include <cmath>

#include "dicke/errors.hpp"
#include "dicke/lindblad.hpp"

using namespace dicke;
using namespace dicke::hilbert;
using namespace dicke::lindblad;

namespace {

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

// Delta a^dag a + eta (a + a^dag) on a bare cavity.
Operator driven_cavity(const FockSpace& f, double detuning, cplx eta)
{
    const auto a = annihilation(f);
    return detuning * number(f) + eta * a.adjoint() + std::conj(eta) * a;
}

Operator small_dicke(const FockSpace& f, const SpinSpace& s, double lambda)
{
    return hamiltonian_scaled(1.0, 1.0, 0.0, lambda, lambda, f, s);
}

} // namespace

TEST_CASE("generator vanishes on the identity without dynamics")
{
    const FockSpace f(3);
    const SpinSpace s(2);
    const auto rho = DensityMatrix::maximally_mixed(Dims{f.dim(), s.dim()});
    CHECK(max_abs(liouvillian_apply(Operator::zero(rho.dims()), 0.0, rho)) == 0.0);
}

TEST_CASE("superoperator matches the direct generator")
{
    const FockSpace f(4);
    const SpinSpace s(2);
    const auto h = small_dicke(f, s, 0.3);
    const Matrix x = Matrix::Random(h.dim(), h.dim());
    const Matrix direct = liouvillian_apply(h, 0.7, x);
    const Eigen::Map<const hilbert::Vector> vx(x.data(), x.size());
    const hilbert::Vector lx = liouvillian_matrix(h, 0.7) * vx;
    const Eigen::Map<const Matrix> back(lx.data(), h.dim(), h.dim());
    CHECK(max_abs(back - direct) < 1e-12);
}

TEST_CASE("generator output is traceless and Hermitian for Hermitian input")
{
    const FockSpace f(5);
    const SpinSpace s(3);
    const auto h = small_dicke(f, s, 0.8);
    const auto rho = DensityMatrix::basis(f, s, 2, 0.5);
    const Matrix l = liouvillian_apply(h, 0.4, rho);
    CHECK(std::abs(l.trace()) < 1e-12);
    CHECK(max_abs(l - l.adjoint()) < 1e-12);
}

TEST_CASE("empty cavity amplitude decays at kappa")
{
    const FockSpace f(20);
    const double kappa = 0.5;
    const cplx alpha(1.5, 0.5);
    const Dims d{f.dim(), 1};
    const auto rho0 = DensityMatrix::pure(coherent_ket(f, alpha), d);
    EvolveSpec spec;
    spec.t_final = 3.0;
    spec.sample_interval = 0.5;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-12;
    const auto r = evolve(rho0, Operator::zero(d), kappa, spec);
    const auto a = annihilation(f);
    const cplx a0 = rho0.expect(a);
    for (std::size_t i = 0; i < r.states.size(); ++i)
        CHECK(std::abs(r.states[i].expect(a) - a0 * std::exp(-kappa * r.times[i])) < 1e-8);
}

TEST_CASE("unitary evolution conserves purity")
{
    const FockSpace f(8);
    const SpinSpace s(3);
    const auto h = small_dicke(f, s, 0.6);
    const auto rho0 = DensityMatrix::basis(f, s, 1, -1.5);
    EvolveSpec spec;
    spec.t_final = 10.0;
    spec.sample_interval = 1.0;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-12;
    spec.truncation_limit = 1.0;
    const auto r = evolve(rho0, h, 0.0, spec);
    for (const auto& st : r.states)
        CHECK(std::abs(st.purity() - 1.0) < 1e-8);
}

TEST_CASE("open evolution keeps trace, Hermiticity and positivity")
{
    const FockSpace f(10);
    const SpinSpace s(2);
    const auto h = small_dicke(f, s, 0.9);
    EvolveSpec spec;
    spec.t_final = 15.0;
    spec.sample_interval = 0.5;
    const auto r = evolve(DensityMatrix::basis(f, s, 0, -1.0), h, 1.0, spec);
    CHECK(r.max_trace_drift < 1e-8);
    CHECK(r.min_eigenvalue > -1e-7);
    for (const auto& st : r.states)
        CHECK(max_abs(st.matrix() - st.matrix().adjoint()) < 1e-10);
}

TEST_CASE("fixed-step and adaptive integrators agree")
{
    const FockSpace f(6);
    const SpinSpace s(2);
    const auto h = small_dicke(f, s, 0.7);
    const auto rho0 = DensityMatrix::basis(f, s, 1, 0.0);
    EvolveSpec dp;
    dp.t_final = 2.0;
    dp.rel_tol = 1e-11;
    dp.abs_tol = 1e-13;
    dp.truncation_limit = 1.0;
    EvolveSpec rk = dp;
    rk.method = ode::Method::rk4_fixed;
    rk.dt_initial = 2e-3;
    const auto a = evolve(rho0, h, 0.5, dp).states.back();
    const auto b = evolve(rho0, h, 0.5, rk).states.back();
    CHECK(max_abs(a.matrix() - b.matrix()) < 1e-9);
}

TEST_CASE("driven damped cavity reaches the closed-form photon number")
{
    const FockSpace f(10);
    const double kappa = 1.0;
    for (const double detuning : {0.0, 0.7, -2.0}) {
        const double eta = 0.3;
        const auto h = driven_cavity(f, detuning, eta);
        const auto rho = steady_state(h, kappa);
        const double n = std::real(rho.expect(number(f)));
        CHECK(n == doctest::Approx(eta * eta / (kappa * kappa + detuning * detuning)).epsilon(1e-8));
        CHECK(steady_state_residual(h, kappa, rho) < 1e-9);
    }
}

TEST_CASE("steady state agrees with long-time evolution")
{
    const FockSpace f(8);
    const SpinSpace s(2);
    const auto h = small_dicke(f, s, 0.25);
    const auto ss = steady_state(h, 1.0);
    EvolveSpec spec;
    spec.t_final = 150.0;
    spec.rel_tol = 1e-10;
    spec.abs_tol = 1e-13;
    const auto last = evolve(DensityMatrix::basis(f, s, 0, -1.0), h, 1.0, spec).states.back();
    CHECK(max_abs(last.matrix() - ss.matrix()) < 1e-6);
}

TEST_CASE("Dicke steady state is parity symmetric")
{
    const FockSpace f(12);
    const SpinSpace s(4);
    const auto rho = steady_state(small_dicke(f, s, 0.8), 1.0);
    const auto p = parity_operator(f, s);
    CHECK(max_abs(p.matrix() * rho.matrix() - rho.matrix() * p.matrix()) < 1e-9);
    CHECK(std::abs(rho.expect(composite_ops(f, s).a)) < 1e-9);
}

TEST_CASE("drive phase rotates the steady state")
{
    const FockSpace f(8);
    const SpinSpace s(2);
    const auto o = composite_ops(f, s);
    const auto tc = hamiltonian_tc(0.4, -0.3, 0.5, f, s);
    const double theta = 0.9;
    const cplx eta = 0.2;
    const cplx eta_rot = eta * std::polar(1.0, theta);
    const auto h0 = tc + eta * o.a.adjoint() + std::conj(eta) * o.a;
    const auto h1 = tc + eta_rot * o.a.adjoint() + std::conj(eta_rot) * o.a;
    const auto r0 = steady_state(h0, 1.0);
    const auto r1 = steady_state(h1, 1.0);
    CHECK(std::abs(r1.expect(o.n) - r0.expect(o.n)) < 1e-10);
    CHECK(std::abs(r1.expect(o.a) - std::polar(1.0, theta) * r0.expect(o.a)) < 1e-10);
    CHECK(std::abs(r1.expect(o.j_minus) - std::polar(1.0, theta) * r0.expect(o.j_minus)) < 1e-10);
}

TEST_CASE("undriven Tavis-Cummings relaxes to the vacuum with all spins down")
{
    const FockSpace f(4);
    const SpinSpace s(3);
    const auto h = hamiltonian_tc(1.0, 0.6, 0.4, f, s);
    const auto vac = DensityMatrix::basis(f, s, 0, -1.5);
    CHECK(steady_state_residual(h, 1.0, vac) < 1e-14);
    const auto rho = steady_state(h, 1.0);
    CHECK(max_abs(rho.matrix() - vac.matrix()) < 1e-9);
}

TEST_CASE("weak-probe scan of the empty cavity is a Lorentzian of width kappa")
{
    params::EffectiveParams e;
    e.omega = 0.0;
    e.omega0 = 5.0;
    e.kappa = 1.0;
    e.n_lambda = 1;
    const std::vector<double> grid{-3.0, -1.0, -0.25, 0.0, 0.5, 2.0};
    const auto scan = transmission_scan(e, grid, 0.05, FockSpace(4), SpinSpace(1));
    REQUIRE(scan.size() == grid.size());
    for (const auto& p : scan) {
        CHECK(p.normalized == doctest::Approx(1.0 / (1.0 + p.delta_p * p.delta_p)).epsilon(1e-5));
        CHECK(p.n_ss == doctest::Approx(p.normalized * empty_cavity_peak(0.05, 1.0)));
    }
}

TEST_CASE("failure modes")
{
    const FockSpace f(4);
    const SpinSpace s(2);
    CHECK_THROWS_AS(steady_state(small_dicke(f, s, 0.3), 0.0), SingularLiouvillian);
    CHECK_THROWS_AS(steady_state(driven_cavity(FockSpace(4), 0.0, 3.0), 1.0), TruncationError);
    EvolveSpec bad;
    bad.t_final = -1.0;
    CHECK_THROWS_AS(bad.validate(), OutsideValidity);
}
