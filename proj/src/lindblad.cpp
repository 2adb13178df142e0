#include "dicke/lindblad.hpp"

#include <cmath>
#include <string>

#include <Eigen/UmfPackSupport>
#include <unsupported/Eigen/KroneckerProduct>

#include "dicke/errors.hpp"
#include "dicke/parallel.hpp"

namespace dicke::lindblad {

using hilbert::cplx;
using hilbert::Dims;
using hilbert::Matrix;

namespace {

constexpr cplx I{0.0, 1.0};

// Cavity annihilation operator on a composite space of the given dims.
SparseMatrix cavity_annihilation(Dims dims)
{
    const int n = dims.total();
    SparseMatrix a(n, n);
    std::vector<Eigen::Triplet<cplx>> trips;
    for (int k = 1; k < dims.fock; ++k)
        for (int s = 0; s < dims.spin; ++s)
            trips.emplace_back((k - 1) * dims.spin + s, k * dims.spin + s,
                               std::sqrt(static_cast<double>(k)));
    a.setFromTriplets(trips.begin(), trips.end());
    return a;
}

SparseMatrix sparse_identity(int n)
{
    SparseMatrix id(n, n);
    id.setIdentity();
    return id;
}

// Precomputed pieces of the density-matrix right-hand side:
// drho = -i (H_eff rho - rho H_eff^dag) + 2 kappa a rho a^dag,
// H_eff = H - i kappa a^dag a.
struct DenseGenerator
{
    Matrix h_eff;
    Matrix h_eff_adj;
    SparseMatrix a;
    SparseMatrix a_adj;
    double kappa;

    DenseGenerator(const Operator& h, double k)
        : a(cavity_annihilation(h.dims())), kappa(k)
    {
        a_adj = a.adjoint();
        const SparseMatrix n = a_adj * a;
        h_eff = h.matrix() - I * kappa * Matrix(n);
        h_eff_adj = h_eff.adjoint();
    }

    Matrix operator()(const Matrix& rho) const
    {
        Matrix out = -I * (h_eff * rho - rho * h_eff_adj);
        if (kappa != 0.0) {
            const Matrix ar = a * rho;
            out.noalias() += (2.0 * kappa) * (ar * a_adj);
        }
        return out;
    }
};

void symmetrize(Matrix& rho)
{
    rho = 0.5 * (rho + rho.adjoint()).eval();
}

DensityMatrix reshape_state(const Eigen::VectorXcd& x, Dims dims)
{
    const int d = dims.total();
    Matrix rho = Eigen::Map<const Matrix>(x.data(), d, d);
    symmetrize(rho);
    rho /= rho.trace();
    return DensityMatrix::unchecked(std::move(rho), dims);
}

void check_truncation(const DensityMatrix& rho, double limit)
{
    if (rho.dims().fock < 2)
        return;
    const double top = rho.top_fock_population();
    if (top > limit)
        throw TruncationError("population " + std::to_string(top) +
                              " in the highest Fock level exceeds " + std::to_string(limit) +
                              "; increase n_max");
}

} // namespace

void EvolveSpec::validate() const
{
    if (!(t_final > 0.0))
        throw OutsideValidity("evolve: t_final must be positive");
    if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
        throw OutsideValidity("evolve: tolerances must be positive");
    if (!(dt_initial > 0.0))
        throw OutsideValidity("evolve: dt_initial must be positive");
    if (sample_interval < 0.0)
        throw OutsideValidity("evolve: sample_interval must be non-negative");
}

Matrix liouvillian_apply(const Operator& h, double kappa, const Matrix& rho)
{
    if (rho.rows() != h.dim() || rho.cols() != h.dim())
        throw DimensionMismatch("Liouvillian: density matrix and Hamiltonian dimensions differ");
    const Matrix& hm = h.matrix();
    Matrix out = -I * (hm * rho - rho * hm);
    if (kappa != 0.0) {
        const SparseMatrix a = cavity_annihilation(h.dims());
        const SparseMatrix ad = a.adjoint();
        const SparseMatrix n = ad * a;
        const Matrix ar = a * rho;
        out += kappa * (2.0 * Matrix(ar * ad) - Matrix(n * rho) - Matrix(rho * n));
    }
    return out;
}

Matrix liouvillian_apply(const Operator& h, double kappa, const DensityMatrix& rho)
{
    hilbert::require_same_dims(h.dims(), rho.dims(), "Liouvillian");
    return liouvillian_apply(h, kappa, rho.matrix());
}

SparseMatrix liouvillian_matrix(const Operator& h, double kappa)
{
    const int d = h.dim();
    const SparseMatrix hs = h.matrix().sparseView(1.0, 0.0);
    const SparseMatrix id = sparse_identity(d);
    // vec(A X B) = (B^T (x) A) vec(X)
    SparseMatrix l = -I * (SparseMatrix(Eigen::kroneckerProduct(id, hs)) -
                           SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(hs.transpose()), id)));
    if (kappa != 0.0) {
        const SparseMatrix a = cavity_annihilation(h.dims());
        const SparseMatrix n = a.adjoint() * a;
        const SparseMatrix a_conj = a.conjugate();
        l += kappa * (2.0 * SparseMatrix(Eigen::kroneckerProduct(a_conj, a)) -
                      SparseMatrix(Eigen::kroneckerProduct(id, n)) -
                      SparseMatrix(Eigen::kroneckerProduct(SparseMatrix(n.transpose()), id)));
    }
    l.prune(cplx(0.0));
    l.makeCompressed();
    return l;
}

EvolveResult evolve(const DensityMatrix& rho0, const Operator& h, double kappa,
                    const EvolveSpec& spec)
{
    spec.validate();
    hilbert::require_same_dims(h.dims(), rho0.dims(), "evolve");
    const Dims dims = rho0.dims();
    const DenseGenerator gen(h, kappa);

    ode::Options opt;
    opt.method = spec.method;
    opt.rel_tol = spec.rel_tol;
    opt.abs_tol = spec.abs_tol;
    opt.dt_initial = spec.dt_initial;
    opt.dt_max = spec.dt_max;

    EvolveResult res;
    Matrix rho = rho0.matrix();
    const cplx trace0 = rho.trace();
    res.min_eigenvalue = rho0.min_eigenvalue();

    auto record = [&](double t) {
        auto state = DensityMatrix::unchecked(rho, dims);
        res.max_trace_drift = std::max(res.max_trace_drift, std::abs(rho.trace() - trace0));
        res.min_eigenvalue = std::min(res.min_eigenvalue, state.min_eigenvalue());
        check_truncation(state, spec.truncation_limit);
        res.times.push_back(t);
        res.states.push_back(std::move(state));
    };
    record(0.0);

    auto rhs = [&gen](double, const Matrix& r) { return gen(r); };
    auto project = [](Matrix& r) { symmetrize(r); };

    double dt = spec.dt_initial;
    const double interval = spec.sample_interval > 0.0 ? spec.sample_interval : spec.t_final;
    double t = 0.0;
    for (long k = 1; t < spec.t_final; ++k) {
        const double t_next = std::min(spec.t_final, static_cast<double>(k) * interval);
        const auto st = ode::integrate(rhs, t, t_next, rho, dt, opt, project);
        res.stats.accepted += st.accepted;
        res.stats.rejected += st.rejected;
        res.stats.rhs_evals += st.rhs_evals;
        t = t_next;
        record(t);
    }
    res.stats.t = t;
    return res;
}

DensityMatrix steady_state(const Operator& h, double kappa, const SteadyStateOptions& opts)
{
    if (!(kappa > 0.0))
        throw SingularLiouvillian("steady state: kappa must be positive; without loss every state in a "
                                  "conserved sector is stationary");
    const int d = h.dim();
    const SparseMatrix l = liouvillian_matrix(h, kappa);

    // Replace row 0 by the trace functional.
    std::vector<Eigen::Triplet<cplx>> trips;
    trips.reserve(static_cast<std::size_t>(l.nonZeros()) + static_cast<std::size_t>(d));
    for (int col = 0; col < l.outerSize(); ++col)
        for (SparseMatrix::InnerIterator it(l, col); it; ++it)
            if (it.row() != 0)
                trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < d; ++k)
        trips.emplace_back(0, k * d + k, cplx(1.0));
    SparseMatrix system(d * d, d * d);
    system.setFromTriplets(trips.begin(), trips.end());
    system.makeCompressed();

    Eigen::UmfPackLU<SparseMatrix> lu;
    lu.analyzePattern(system);
    lu.factorize(system);
    if (lu.info() != Eigen::Success)
        throw SingularLiouvillian("steady state: LU factorisation failed (" + std::to_string(static_cast<int>(lu.info())) +
                                  "); the stationary manifold is degenerate");

    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(d * d);
    rhs(0) = 1.0;
    Eigen::VectorXcd x = lu.solve(rhs);
    for (int k = 0; k < opts.refinement_steps; ++k) {
        const Eigen::VectorXcd r = rhs - system * x;
        if (r.cwiseAbs().maxCoeff() < 1e-15)
            break;
        x += lu.solve(r);
    }

    cplx tr = 0.0;
    for (int k = 0; k < d; ++k)
        tr += x(k * d + k);
    // A (numerically) singular system shows up as a huge solution whose trace
    // no longer honours the constraint row.
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6 || std::abs(tr - cplx(1.0)) > 1e-6)
        throw SingularLiouvillian("steady state is not unique (ill-conditioned trace-constrained system)");

    DensityMatrix rho = reshape_state(x, h.dims());
    const double res = steady_state_residual(h, kappa, rho);
    if (res > opts.residual_tol)
        throw SingularLiouvillian("steady-state residual " + std::to_string(res) + " exceeds tolerance");
    check_truncation(rho, opts.truncation_limit);
    return rho;
}

double steady_state_residual(const Operator& h, double kappa, const DensityMatrix& rho)
{
    return liouvillian_apply(h, kappa, rho).cwiseAbs().maxCoeff();
}

Operator probe_frame_hamiltonian(const params::EffectiveParams& eff, const ProbeConfig& probe,
                                 const hilbert::FockSpace& fock, const hilbert::SpinSpace& spin)
{
    if (probe.eta_p < 0.0)
        throw OutsideValidity("probe amplitude must be non-negative");
    const double frame = eff.empty_cavity + probe.delta_p;
    Operator h = hilbert::hamiltonian_tc(eff.lower_state_cavity() - frame, eff.omega0 - frame,
                                         eff.lambda_r, fock, spin);
    if (probe.eta_p != 0.0) {
        const auto ops = hilbert::composite_ops(fock, spin);
        h += cplx(probe.eta_p) * (ops.a + ops.a.adjoint());
    }
    return h;
}

double empty_cavity_peak(double eta_p, double kappa)
{
    return eta_p * eta_p / (kappa * kappa);
}

std::vector<TransmissionPoint> transmission_scan(const params::EffectiveParams& eff,
                                                 const std::vector<double>& probe_grid,
                                                 double eta_p, const hilbert::FockSpace& fock,
                                                 const hilbert::SpinSpace& spin,
                                                 const SteadyStateOptions& opts)
{
    if (!(eff.kappa > 0.0))
        throw OutsideValidity("transmission needs kappa > 0");
    const double n_empty = empty_cavity_peak(eta_p, eff.kappa);
    if (n_empty >= 0.1 * fock.n_max)
        throw OutsideValidity("probe too strong for the weak-probe regime (n_empty = " +
                              std::to_string(n_empty) + ")");

    const auto n_op = hilbert::composite_ops(fock, spin).n;
    return parallel_map(probe_grid.size(), [&](std::size_t i) {
        const ProbeConfig probe{eta_p, probe_grid[i]};
        const auto rho = steady_state(probe_frame_hamiltonian(eff, probe, fock, spin), eff.kappa, opts);
        const double n = rho.expect(n_op).real();
        return TransmissionPoint{probe.delta_p, n, n / n_empty};
    });
}

} // namespace dicke::lindblad
