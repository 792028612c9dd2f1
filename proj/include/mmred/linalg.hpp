#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <vector>

#include "mmred/errors.hpp"

namespace mmred {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;
using Index = Eigen::Index;

// Default tolerances (double-precision headroom at desk scale).
inline constexpr double kResidualTol = 1e-9;   // Sylvester residual bound factor
inline constexpr double kRankTolFactor = 1e-10; // times largest singular value
inline constexpr double kEigTolFactor = 1e-8;   // times max spectral radius

inline void require_square(const Matrix& a, const char* name) {
    if (a.rows() != a.cols()) {
        std::ostringstream os;
        os << name << " must be square, got " << a.rows() << "x" << a.cols();
        throw ShapeError(os.str());
    }
}

// ---------------------------------------------------------------------------
// Basic kernels
// ---------------------------------------------------------------------------

inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index i = 0; i < a.rows(); ++i)
        for (Index j = 0; j < a.cols(); ++j)
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

// Column-stacked vectorization and its inverse.
inline Vector vec(const Matrix& a) {
    return Eigen::Map<const Vector>(a.data(), a.size());
}

inline Matrix unvec(const Vector& v, Index rows, Index cols) {
    if (v.size() != rows * cols)
        throw ShapeError("unvec: size mismatch");
    return Eigen::Map<const Matrix>(v.data(), rows, cols);
}

/// Eigenvalues of a real matrix; conjugate pairs are exact for real input
/// (computed from the real Schur form).
inline ComplexVector eigenvalues(const Matrix& a) {
    require_square(a, "A");
    if (a.rows() == 0)
        return ComplexVector(0);
    Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
    if (es.info() != Eigen::Success)
        throw SingularSystem("eigenvalue iteration failed to converge");
    return es.eigenvalues();
}

inline double spectral_radius(const Matrix& a) {
    if (a.rows() == 0)
        return 0.0;
    return eigenvalues(a).cwiseAbs().maxCoeff();
}

/// Max real part of the spectrum; negative certifies asymptotic stability.
inline double spectral_abscissa(const Matrix& a) {
    if (a.rows() == 0)
        return -std::numeric_limits<double>::infinity();
    return eigenvalues(a).real().maxCoeff();
}

/// Smallest distance between any eigenvalue of A and any eigenvalue of S.
inline double min_spectral_gap(const Matrix& a, const Matrix& s) {
    const ComplexVector ea = eigenvalues(a);
    const ComplexVector es = eigenvalues(s);
    if (ea.size() == 0 || es.size() == 0)
        return std::numeric_limits<double>::infinity();
    double gap = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < ea.size(); ++i)
        for (Index j = 0; j < es.size(); ++j)
            gap = std::min(gap, std::abs(ea(i) - es(j)));
    return gap;
}

/// Eigenvalue-comparison tolerance for a pair of matrices.
inline double eig_tolerance(const Matrix& a, const Matrix& s) {
    const double scale = std::max(spectral_radius(a), spectral_radius(s));
    return kEigTolFactor * std::max(scale, 1.0);
}

inline Index rank(const Matrix& a, double tol = -1.0) {
    if (a.size() == 0)
        return 0;
    Eigen::JacobiSVD<Matrix> svd(a);
    const double smax = svd.singularValues()(0);
    if (smax == 0.0)
        return 0;
    const double threshold = tol >= 0.0 ? tol : kRankTolFactor * smax;
    Index r = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > threshold)
            ++r;
    return r;
}

/// Orthonormal basis of the null space (columns); empty matrix when trivial.
inline Matrix null_space(const Matrix& a, double tol = -1.0) {
    if (a.size() == 0)
        return Matrix::Identity(a.cols(), a.cols());
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullV);
    const double smax = svd.singularValues()(0);
    const double threshold = tol >= 0.0 ? tol : kRankTolFactor * std::max(smax, 1.0);
    Index r = 0;
    for (Index i = 0; i < svd.singularValues().size(); ++i)
        if (svd.singularValues()(i) > threshold)
            ++r;
    const Index dim = a.cols() - r;
    Matrix basis(a.cols(), dim);
    basis = svd.matrixV().rightCols(dim);
    return basis;
}

/// Matrix exponential expm(A*t); expm(A,0) = I.
inline Matrix expm(const Matrix& a, double t = 1.0) {
    require_square(a, "A");
    if (a.rows() == 0)
        return Matrix(0, 0);
    return (a * t).exp();
}

// ---------------------------------------------------------------------------
// Sylvester equation  A Pi + B L = Pi S
// ---------------------------------------------------------------------------

struct SylvesterSolution {
    ComplexMatrix pi;     // n x nu
    double residual_norm; // ||A Pi + B L - Pi S||_F after the solve
    Index rank;           // numerical rank of Pi

    /// Real part of Pi. All solver inputs are real, so the imaginary part is
    /// zero by construction; asserts that before discarding it.
    Matrix pi_real() const {
        if (pi.size() > 0 && pi.imag().cwiseAbs().maxCoeff() > 1e-12 * (1.0 + pi.real().cwiseAbs().maxCoeff()))
            throw SingularSystem("Sylvester solution has unexpected imaginary part");
        return pi.real();
    }
};

/// Solves A Pi + B L = Pi S by a direct dense solve of the vectorized system
/// (I_nu (x) A - S^T (x) I_n) vec(Pi) = -vec(B L).
/// Requires disjoint spectra of A and S.
inline SylvesterSolution solve_sylvester(const Matrix& a, const Matrix& b, const Matrix& l,
                                         const Matrix& s) {
    require_square(a, "A");
    require_square(s, "S");
    const Index n = a.rows();
    const Index nu = s.rows();
    if (b.rows() != n || l.cols() != nu)
        throw ShapeError("solve_sylvester: B/L shapes inconsistent with A/S");
    if (b.cols() != l.rows())
        throw ShapeError("solve_sylvester: inner dimensions of B L disagree");

    const double tol = eig_tolerance(a, s);
    const double gap = min_spectral_gap(a, s);
    if (gap < tol) {
        std::ostringstream os;
        os << "solve_sylvester: spectra of A and S overlap (min eigenvalue gap " << gap
           << " < tolerance " << tol << ")";
        throw SpectraOverlap(os.str());
    }

    Matrix op = kron(Matrix::Identity(nu, nu), a) - kron(s.transpose(), Matrix::Identity(n, n));
    Eigen::FullPivLU<Matrix> lu(op);
    const Matrix bl = b * l;
    const Matrix pi = unvec(lu.solve(-vec(bl)), n, nu);
    if (!pi.allFinite())
        throw SingularSystem("solve_sylvester: vectorized operator is numerically singular");

    // Backward-error gate: Jordan-structured instances can be extremely
    // graded (huge ||Pi||), so the bound is relative to the solution scale.
    const double residual = (a * pi + bl - pi * s).norm();
    const double bound =
        kResidualTol * (a.norm() * pi.norm() + b.norm() * l.norm() + pi.norm() * s.norm());
    if (residual > std::max(bound, 1e-300)) {
        std::ostringstream os;
        os << "solve_sylvester: residual " << residual << " exceeds bound " << bound
           << " (numerically singular operator)";
        throw SingularSystem(os.str());
    }

    SylvesterSolution sol;
    sol.pi = pi.cast<Complex>();
    sol.residual_norm = residual;
    sol.rank = rank(pi);
    return sol;
}

/// Basis of { Pi : M Pi = Pi S }, via the null space of the Kronecker
/// operator I_nu (x) M - S^T (x) I_n. Empty iff the spectra are disjoint.
/// Basis elements are Frobenius-normalized.
inline std::vector<Matrix> homogeneous_sylvester_basis(const Matrix& m, const Matrix& s) {
    require_square(m, "M");
    require_square(s, "S");
    const Index n = m.rows();
    const Index nu = s.rows();
    const Matrix op =
        kron(Matrix::Identity(nu, nu), m) - kron(s.transpose(), Matrix::Identity(n, n));
    const double scale = std::max({m.norm(), s.norm(), 1.0});
    const Matrix ker = null_space(op, kRankTolFactor * scale);
    std::vector<Matrix> basis;
    basis.reserve(static_cast<std::size_t>(ker.cols()));
    for (Index j = 0; j < ker.cols(); ++j) {
        Matrix pi = unvec(ker.col(j), n, nu);
        pi /= pi.norm();
        basis.push_back(std::move(pi));
    }
    return basis;
}

} // namespace mmred
