#include "dicke/hilbert.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "dicke/errors.hpp"

namespace dicke::hilbert {

FockSpace::FockSpace(int n) : n_max(n)
{
    if (n < 1)
        throw OutsideValidity("Fock truncation n_max must be at least 1");
}

SpinSpace::SpinSpace(int n) : n_lambda(n)
{
    if (n < 1)
        throw OutsideValidity("spin space needs at least one atom");
}

void require_same_dims(Dims a, Dims b, const char* context)
{
    if (!(a == b))
        throw DimensionMismatch(std::string(context) + ": operands act on " + std::to_string(a.fock) +
                                "x" + std::to_string(a.spin) + " and " + std::to_string(b.fock) + "x" +
                                std::to_string(b.spin) + " spaces");
}

Operator::Operator(Matrix m, Dims dims) : m_(std::move(m)), dims_(dims)
{
    if (m_.rows() != dims_.total() || m_.cols() != dims_.total())
        throw DimensionMismatch("matrix shape does not match operator dimensions");
}

Operator Operator::identity(Dims dims)
{
    return {Matrix::Identity(dims.total(), dims.total()), dims};
}

Operator Operator::zero(Dims dims)
{
    return {Matrix::Zero(dims.total(), dims.total()), dims};
}

Operator Operator::adjoint() const
{
    return {m_.adjoint(), dims_};
}

double Operator::norm() const
{
    if (m_.size() == 0)
        return 0.0;
    Eigen::BDCSVD<Matrix> svd(m_);
    return svd.singularValues()(0);
}

Operator& Operator::operator+=(const Operator& other)
{
    require_same_dims(dims_, other.dims_, "operator +");
    m_ += other.m_;
    return *this;
}

Operator& Operator::operator-=(const Operator& other)
{
    require_same_dims(dims_, other.dims_, "operator -");
    m_ -= other.m_;
    return *this;
}

Operator& Operator::operator*=(cplx s)
{
    m_ *= s;
    return *this;
}

Operator operator*(const Operator& a, const Operator& b)
{
    require_same_dims(a.dims_, b.dims_, "operator *");
    return {a.m_ * b.m_, a.dims_};
}

Operator commutator(const Operator& a, const Operator& b)
{
    return a * b - b * a;
}

Operator annihilation(const FockSpace& space)
{
    Matrix m = Matrix::Zero(space.dim(), space.dim());
    for (int n = 1; n <= space.n_max; ++n)
        m(n - 1, n) = std::sqrt(static_cast<double>(n));
    return {m, Dims{space.dim(), 1}};
}

Operator number(const FockSpace& space)
{
    Matrix m = Matrix::Zero(space.dim(), space.dim());
    for (int n = 0; n <= space.n_max; ++n)
        m(n, n) = static_cast<double>(n);
    return {m, Dims{space.dim(), 1}};
}

CollectiveOps collective_ops(const SpinSpace& space)
{
    const int d = space.dim();
    const double j = space.j();
    Matrix jp = Matrix::Zero(d, d);
    Matrix jz = Matrix::Zero(d, d);
    for (int k = 0; k < d; ++k) {
        const double m = -j + k;
        jz(k, k) = m;
        if (k + 1 < d)
            jp(k + 1, k) = std::sqrt(j * (j + 1.0) - m * (m + 1.0));
    }
    const Dims dims{1, d};
    return {Operator(jp, dims), Operator(jp.adjoint(), dims), Operator(jz, dims)};
}

Operator tensor(const Operator& fock_op, const Operator& spin_op)
{
    if (fock_op.dims().spin != 1 || spin_op.dims().fock != 1)
        throw DimensionMismatch("tensor expects a Fock-factor operator and a spin-factor operator");
    const Matrix& a = fock_op.matrix();
    const Matrix& b = spin_op.matrix();
    const auto ra = a.rows();
    const auto rb = b.rows();
    Matrix out(ra * rb, ra * rb);
    for (Eigen::Index i = 0; i < ra; ++i)
        for (Eigen::Index k = 0; k < ra; ++k)
            out.block(i * rb, k * rb, rb, rb) = a(i, k) * b;
    return {out, Dims{fock_op.dims().fock, spin_op.dims().spin}};
}

CompositeOps composite_ops(const FockSpace& fock, const SpinSpace& spin)
{
    const Operator id_f = Operator::identity(Dims{fock.dim(), 1});
    const Operator id_s = Operator::identity(Dims{1, spin.dim()});
    const auto j = collective_ops(spin);
    CompositeOps ops;
    ops.a = tensor(annihilation(fock), id_s);
    ops.n = tensor(number(fock), id_s);
    ops.j_plus = tensor(id_f, j.plus);
    ops.j_minus = tensor(id_f, j.minus);
    ops.j_z = tensor(id_f, j.z);
    ops.dims = ops.a.dims();
    return ops;
}

Operator hamiltonian_scaled(double omega, double omega0, double delta, double lambda_r,
                            double lambda_s, const FockSpace& fock, const SpinSpace& spin)
{
    const auto ops = composite_ops(fock, spin);
    const double n = static_cast<double>(spin.n_lambda);
    const double sq = std::sqrt(n);
    const Operator ad = ops.a.adjoint();

    Operator h = cplx(omega) * ops.n + cplx(omega0) * ops.j_z;
    if (delta != 0.0)
        h += cplx(delta / n) * (ops.n * ops.j_z);
    if (lambda_r != 0.0)
        h += cplx(lambda_r / sq) * (ops.a * ops.j_plus + ad * ops.j_minus);
    if (lambda_s != 0.0)
        h += cplx(lambda_s / sq) * (ad * ops.j_plus + ops.a * ops.j_minus);
    return h;
}

namespace {

void require_spin_matches(const params::EffectiveParams& eff, const SpinSpace& spin)
{
    if (eff.n_lambda != spin.n_lambda)
        throw DimensionMismatch("spin space holds " + std::to_string(spin.n_lambda) +
                                " atoms but the parameters describe " + std::to_string(eff.n_lambda));
}

} // namespace

Operator hamiltonian_general(const params::EffectiveParams& eff, const FockSpace& fock,
                             const SpinSpace& spin)
{
    require_spin_matches(eff, spin);
    return hamiltonian_scaled(eff.omega, eff.omega0, eff.delta, eff.lambda_r, eff.lambda_s, fock,
                              spin);
}

Operator hamiltonian_dicke(const params::EffectiveParams& eff, const FockSpace& fock,
                           const SpinSpace& spin)
{
    require_spin_matches(eff, spin);
    const double lambda = eff.dicke_coupling();
    // (lambda/sqrt N)(a + a^dag)(J_+ + J_-) expands into both Raman channels.
    return hamiltonian_scaled(eff.omega, eff.omega0, eff.delta, lambda, lambda, fock, spin);
}

Operator hamiltonian_tc(double omega_cav, double omega0, double lambda_r, const FockSpace& fock,
                        const SpinSpace& spin)
{
    return hamiltonian_scaled(omega_cav, omega0, 0.0, lambda_r, 0.0, fock, spin);
}

int basis_index(const SpinSpace& spin, int n, double m)
{
    const int k = static_cast<int>(std::lround(m + spin.j()));
    if (k < 0 || k >= spin.dim())
        throw DimensionMismatch("m outside [-j, j]");
    return n * spin.dim() + k;
}

Operator parity_operator(const FockSpace& fock, const SpinSpace& spin)
{
    const int ds = spin.dim();
    Matrix p = Matrix::Zero(fock.dim() * ds, fock.dim() * ds);
    for (int n = 0; n < fock.dim(); ++n)
        for (int k = 0; k < ds; ++k) {
            // k = m + j
            const int idx = n * ds + k;
            p(idx, idx) = ((n + k) % 2 == 0) ? 1.0 : -1.0;
        }
    return {p, Dims{fock.dim(), ds}};
}

DensityMatrix::DensityMatrix(Matrix rho, Dims dims) : DensityMatrix(std::move(rho), dims, true) {}

DensityMatrix::DensityMatrix(Matrix rho, Dims dims, bool validate)
    : rho_(std::move(rho)), dims_(dims)
{
    if (rho_.rows() != dims_.total() || rho_.cols() != dims_.total())
        throw DimensionMismatch("density matrix shape does not match dimensions");
    if (!validate)
        return;
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > hermitian_tol)
        throw Error("density matrix is not Hermitian");
    if (std::abs(rho_.trace() - cplx(1.0)) > trace_tol)
        throw Error("density matrix trace differs from 1");
    if (min_eigenvalue() < -positivity_tol)
        throw Error("density matrix has a negative eigenvalue");
}

DensityMatrix DensityMatrix::unchecked(Matrix rho, Dims dims)
{
    return DensityMatrix(std::move(rho), dims, false);
}

DensityMatrix DensityMatrix::pure(const Vector& ket, Dims dims)
{
    const Vector psi = ket / ket.norm();
    return DensityMatrix(psi * psi.adjoint(), dims);
}

DensityMatrix DensityMatrix::maximally_mixed(Dims dims)
{
    const int d = dims.total();
    return DensityMatrix(Matrix::Identity(d, d) / static_cast<double>(d), dims);
}

DensityMatrix DensityMatrix::basis(const FockSpace& fock, const SpinSpace& spin, int n, double m)
{
    if (n < 0 || n > fock.n_max)
        throw DimensionMismatch("photon number outside the truncated space");
    Vector ket = Vector::Zero(fock.dim() * spin.dim());
    ket(basis_index(spin, n, m)) = 1.0;
    return pure(ket, Dims{fock.dim(), spin.dim()});
}

cplx DensityMatrix::expect(const Operator& op) const
{
    require_same_dims(dims_, op.dims(), "expectation value");
    // tr(rho A) without forming the product.
    return (rho_.transpose().array() * op.matrix().array()).sum();
}

double DensityMatrix::purity() const
{
    return (rho_.array() * rho_.transpose().array()).sum().real();
}

double DensityMatrix::min_eigenvalue() const
{
    const Matrix herm = 0.5 * (rho_ + rho_.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

Eigen::VectorXd DensityMatrix::photon_distribution() const
{
    Eigen::VectorXd p(dims_.fock);
    for (int n = 0; n < dims_.fock; ++n)
        p(n) = rho_.diagonal().segment(n * dims_.spin, dims_.spin).real().sum();
    return p;
}

double DensityMatrix::top_fock_population() const
{
    return photon_distribution()(dims_.fock - 1);
}

Vector coherent_ket(const FockSpace& fock, cplx alpha)
{
    Vector ket(fock.dim());
    cplx c = 1.0;
    for (int n = 0; n < fock.dim(); ++n) {
        if (n > 0)
            c *= alpha / std::sqrt(static_cast<double>(n));
        ket(n) = c;
    }
    return ket / ket.norm();
}

void write_matrix_dump(std::ostream& os, const Operator& op)
{
    const auto old = os.precision(17);
    os << op.dims().fock << ' ' << op.dims().spin << '\n';
    const Matrix& m = op.matrix();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c > 0)
                os << ' ';
            os << m(r, c).real() << ' ' << m(r, c).imag();
        }
        os << '\n';
    }
    os.precision(old);
}

Operator read_matrix_dump(std::istream& is)
{
    Dims dims;
    if (!(is >> dims.fock >> dims.spin) || dims.fock < 1 || dims.spin < 1)
        throw Error("matrix dump: bad dimension header");
    const int d = dims.total();
    Matrix m(d, d);
    for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
            double re = 0.0;
            double im = 0.0;
            if (!(is >> re >> im))
                throw Error("matrix dump: truncated data");
            m(r, c) = cplx(re, im);
        }
    return {m, dims};
}

} // namespace dicke::hilbert
