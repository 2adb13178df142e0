#pragma once

#include <complex>
#include <iosfwd>

#include <Eigen/Dense>

#include "dicke/params.hpp"

// Truncated cavity Fock space, the symmetric (j = N/2) collective spin space
// and dense operators on their tensor product.
//
// Ordering convention: composite basis index = n * spin_dim + (m + j), i.e.
// Fock-major Kronecker products, with the spin basis ordered m = -j ... +j.
// Every composite operator in the library is built through tensor() so this
// ordering lives in one place.
namespace dicke::hilbert {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

struct FockSpace
{
    int n_max = 1;

    explicit FockSpace(int n_max);
    int dim() const { return n_max + 1; }
};

struct SpinSpace
{
    int n_lambda = 1;

    explicit SpinSpace(int n_lambda);
    int dim() const { return n_lambda + 1; }
    double j() const { return 0.5 * n_lambda; }
};

// Factor dimensions of the space an operator acts on. A factor of dimension 1
// is absent: Fock-only operators have spin == 1, spin-only ones fock == 1.
struct Dims
{
    int fock = 1;
    int spin = 1;

    int total() const { return fock * spin; }
    bool operator==(const Dims&) const = default;
};

class Operator
{
public:
    Operator() = default;
    Operator(Matrix m, Dims dims);

    static Operator identity(Dims dims);
    static Operator zero(Dims dims);

    const Matrix& matrix() const { return m_; }
    Dims dims() const { return dims_; }
    int dim() const { return dims_.total(); }

    Operator adjoint() const;
    cplx trace() const { return m_.trace(); }
    cplx operator()(int row, int col) const { return m_(row, col); }

    // Largest singular value.
    double norm() const;
    double hermiticity_defect() const { return (m_ - m_.adjoint()).norm(); }

    Operator& operator+=(const Operator& other);
    Operator& operator-=(const Operator& other);
    Operator& operator*=(cplx s);

    friend Operator operator+(Operator a, const Operator& b) { return a += b; }
    friend Operator operator-(Operator a, const Operator& b) { return a -= b; }
    friend Operator operator*(const Operator& a, const Operator& b);
    friend Operator operator*(cplx s, Operator a) { return a *= s; }
    friend Operator operator*(Operator a, cplx s) { return a *= s; }

private:
    Matrix m_;
    Dims dims_;
};

Operator commutator(const Operator& a, const Operator& b);

// Throws DimensionMismatch unless a and b act on the same space.
void require_same_dims(Dims a, Dims b, const char* context);

Operator annihilation(const FockSpace& space);
Operator number(const FockSpace& space);

struct CollectiveOps
{
    Operator plus;
    Operator minus;
    Operator z;
};

CollectiveOps collective_ops(const SpinSpace& space);

// Kronecker product of a Fock-factor operator with a spin-factor operator.
Operator tensor(const Operator& fock_op, const Operator& spin_op);

// Frequently used operators lifted onto the composite space.
struct CompositeOps
{
    Operator a;
    Operator n;
    Operator j_plus;
    Operator j_minus;
    Operator j_z;
    Dims dims;
};

CompositeOps composite_ops(const FockSpace& fock, const SpinSpace& spin);

// H = w a^dag a + w0 J_z + (delta/N) a^dag a J_z
//     + (lambda_r/sqrt N)(a J_+ + a^dag J_-) + (lambda_s/sqrt N)(a^dag J_+ + a J_-)
// N is the dimension of `spin`, which must equal eff.n_lambda.
Operator hamiltonian_general(const params::EffectiveParams& eff, const FockSpace& fock,
                             const SpinSpace& spin);

// Dicke form with a single coupling lambda = eff.dicke_coupling().
Operator hamiltonian_dicke(const params::EffectiveParams& eff, const FockSpace& fock,
                           const SpinSpace& spin);

// Same five terms as hamiltonian_general, with the coupling normalised by the
// simulated spin size. Used when a small spin stands in for a large atom
// number, e.g. in linear response.
Operator hamiltonian_scaled(double omega, double omega0, double delta, double lambda_r,
                            double lambda_s, const FockSpace& fock, const SpinSpace& spin);

// Tavis-Cummings: omega_cav a^dag a + omega0 J_z + (lambda_r/sqrt N)(a J_+ + a^dag J_-).
Operator hamiltonian_tc(double omega_cav, double omega0, double lambda_r, const FockSpace& fock,
                        const SpinSpace& spin);

// exp(i pi (a^dag a + J_z + j)), diagonal with entries +-1.
Operator parity_operator(const FockSpace& fock, const SpinSpace& spin);

// Composite basis index of |n> (x) |j, m>.
int basis_index(const SpinSpace& spin, int n, double m);

class DensityMatrix
{
public:
    static constexpr double hermitian_tol = 1e-10;
    static constexpr double trace_tol = 1e-9;
    static constexpr double positivity_tol = 1e-9;

    // Validates on construction; throws Error with the violated invariant.
    DensityMatrix(Matrix rho, Dims dims);

    static DensityMatrix pure(const Vector& ket, Dims dims);
    static DensityMatrix maximally_mixed(Dims dims);
    // |n> (x) |j, m>
    static DensityMatrix basis(const FockSpace& fock, const SpinSpace& spin, int n, double m);

    // Builds without validation; used internally for integrator states.
    static DensityMatrix unchecked(Matrix rho, Dims dims);

    const Matrix& matrix() const { return rho_; }
    Dims dims() const { return dims_; }
    int dim() const { return dims_.total(); }

    cplx expect(const Operator& op) const;
    double purity() const;
    double min_eigenvalue() const;
    // Population of the highest retained Fock level.
    double top_fock_population() const;
    // Photon-number distribution P(n), summed over the spin factor.
    Eigen::VectorXd photon_distribution() const;

private:
    DensityMatrix(Matrix rho, Dims dims, bool validate);

    Matrix rho_;
    Dims dims_;
};

// Truncated, renormalised coherent state on a Fock space.
Vector coherent_ket(const FockSpace& fock, cplx alpha);

// Debug dump: "fock spin" header line, then one line per row of
// "re im re im ..." pairs.
void write_matrix_dump(std::ostream& os, const Operator& op);
Operator read_matrix_dump(std::istream& is);

} // namespace dicke::hilbert
