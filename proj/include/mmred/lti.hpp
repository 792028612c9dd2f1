#pragma once

#include <cmath>
#include <sstream>

#include "mmred/linalg.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// State-space realization (SISO): y = C x + D u, xdot = A x + B u
// ---------------------------------------------------------------------------

struct Realization {
    Matrix A; // n x n
    Matrix B; // n x 1
    Matrix C; // 1 x n
    double D = 0.0;

    Index order() const { return A.rows(); }

    void validate() const {
        if (A.rows() != A.cols())
            throw ShapeError("Realization: A must be square");
        if (B.rows() != A.rows() || B.cols() != 1)
            throw ShapeError("Realization: B must be n x 1");
        if (C.rows() != 1 || C.cols() != A.rows())
            throw ShapeError("Realization: C must be 1 x n");
        if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !std::isfinite(D))
            throw ShapeError("Realization: entries must be finite");
    }

    /// Order-0 realization of a constant gain (used for static controllers).
    static Realization static_gain(double k) {
        Realization r;
        r.A = Matrix(0, 0);
        r.B = Matrix(0, 1);
        r.C = Matrix(1, 0);
        r.D = k;
        return r;
    }
};

inline Realization make_realization(const Matrix& a, const Matrix& b, const Matrix& c,
                                    double d = 0.0) {
    Realization r{a, b, c, d};
    r.validate();
    return r;
}

// ---------------------------------------------------------------------------
// Transfer-function evaluation and moments
// ---------------------------------------------------------------------------

/// P(s) = C (sI - A)^-1 B + D via a linear solve, never an explicit inverse.
inline Complex eval_transfer(const Realization& sys, Complex s) {
    const Index n = sys.order();
    if (n == 0)
        return Complex(sys.D, 0.0);
    const ComplexVector eigs = eigenvalues(sys.A);
    const double tol = kEigTolFactor * std::max(eigs.cwiseAbs().maxCoeff(), 1.0);
    for (Index i = 0; i < n; ++i) {
        if (std::abs(s - eigs(i)) < tol) {
            std::ostringstream os;
            os << "eval_transfer: s = " << s << " hits a pole (eigenvalue " << eigs(i) << ")";
            throw PoleHit(os.str());
        }
    }
    ComplexMatrix m = s * ComplexMatrix::Identity(n, n) - sys.A.cast<Complex>();
    ComplexVector v = m.partialPivLu().solve(sys.B.cast<Complex>());
    return (sys.C.cast<Complex>() * v)(0, 0) + Complex(sys.D, 0.0);
}

/// k-moment at s1: eta_k(s1) = C (s1 I - A)^-(k+1) B (+ D for k = 0),
/// equal to ((-1)^k / k!) d^k P / ds^k at s1.
inline Complex moment_resolvent(const Realization& sys, Complex s1, int k) {
    if (k < 0)
        throw ShapeError("moment_resolvent: k must be nonnegative");
    const Index n = sys.order();
    if (n == 0)
        return k == 0 ? Complex(sys.D, 0.0) : Complex(0.0, 0.0);
    const ComplexVector eigs = eigenvalues(sys.A);
    const double tol = kEigTolFactor * std::max(eigs.cwiseAbs().maxCoeff(), 1.0);
    for (Index i = 0; i < n; ++i) {
        if (std::abs(s1 - eigs(i)) < tol) {
            std::ostringstream os;
            os << "moment_resolvent: s1 = " << s1 << " hits a pole";
            throw PoleHit(os.str());
        }
    }
    ComplexMatrix m = s1 * ComplexMatrix::Identity(n, n) - sys.A.cast<Complex>();
    Eigen::PartialPivLU<ComplexMatrix> lu(m);
    ComplexVector v = lu.solve(sys.B.cast<Complex>());
    for (int i = 0; i < k; ++i)
        v = lu.solve(v);
    Complex out = (sys.C.cast<Complex>() * v)(0, 0);
    if (k == 0)
        out += Complex(sys.D, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// System predicates
// ---------------------------------------------------------------------------

inline bool is_stable(const Realization& sys, double margin = 0.0) {
    return spectral_abscissa(sys.A) < -margin;
}

inline Index controllability_rank(const Matrix& a, const Matrix& b) {
    const Index n = a.rows();
    if (n == 0)
        return 0;
    Matrix ctrb(n, n * b.cols());
    Matrix blk = b;
    for (Index k = 0; k < n; ++k) {
        ctrb.middleCols(k * b.cols(), b.cols()) = blk;
        blk = a * blk;
    }
    return rank(ctrb);
}

inline Index observability_rank(const Matrix& c, const Matrix& a) {
    return controllability_rank(a.transpose(), c.transpose());
}

inline bool is_minimal(const Realization& sys) {
    const Index n = sys.order();
    return controllability_rank(sys.A, sys.B) == n && observability_rank(sys.C, sys.A) == n;
}

// ---------------------------------------------------------------------------
// Negative unity feedback: error eps = r - y enters the controller.
// ---------------------------------------------------------------------------

/// The three loop transfer functions of the classic configuration:
/// p_cl: r -> y, t_dy: d -> y (d at plant input), e_re: r -> eps.
/// E(s) + P_CL(s) = 1 holds identically.
struct LoopSet {
    Realization p_cl;
    Realization t_dy;
    Realization e_re;
};

inline LoopSet negative_feedback(const Realization& plant, const Realization& controller) {
    plant.validate();
    controller.validate();
    const Index n = plant.order();
    const Index nk = controller.order();
    const double dp = plant.D;
    const double dk = controller.D;
    if (std::abs(1.0 + dp * dk) < 1e-12)
        throw IllPosed("negative_feedback: 1 + D_P * D_K = 0, loop is ill-posed");
    const double alpha = 1.0 / (1.0 + dp * dk);

    const Matrix& A = plant.A;
    const Matrix& B = plant.B;
    const Matrix& C = plant.C;
    const Matrix& Ak = controller.A;
    const Matrix& Bk = controller.B;
    const Matrix& Ck = controller.C;

    Matrix Acl(n + nk, n + nk);
    Acl.topLeftCorner(n, n) = A - alpha * dk * (B * C);
    Acl.topRightCorner(n, nk) = alpha * (B * Ck);
    Acl.bottomLeftCorner(nk, n) = -alpha * (Bk * C);
    Acl.bottomRightCorner(nk, nk) = Ak - alpha * dp * (Bk * Ck);

    LoopSet loop;

    // r -> y
    Matrix Bcl(n + nk, 1);
    Bcl.topRows(n) = alpha * dk * B;
    Bcl.bottomRows(nk) = alpha * Bk;
    Matrix Ccl(1, n + nk);
    Ccl.leftCols(n) = alpha * C;
    Ccl.rightCols(nk) = alpha * dp * Ck;
    loop.p_cl = make_realization(Acl, Bcl, Ccl, alpha * dp * dk);

    // r -> eps = 1 - p_cl
    loop.e_re = make_realization(Acl, Bcl, -Ccl, 1.0 - alpha * dp * dk);

    // d -> y, disturbance at the plant input
    Matrix Bt(n + nk, 1);
    Bt.topRows(n) = alpha * B;
    Bt.bottomRows(nk) = -alpha * dp * Bk;
    loop.t_dy = make_realization(Acl, Bt, Ccl, alpha * dp);

    return loop;
}

} // namespace mmred
