#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "mmred/lti.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// Exogenous signal generator: omega_dot = S omega, theta = L omega.
// The spectrum of S carries the interpolation points / reference modes.
// ---------------------------------------------------------------------------

struct SignalGenerator {
    Matrix S;      // nu x nu
    Matrix L;      // 1 x nu
    Vector omega0; // nu

    Index dim() const { return S.rows(); }

    void validate() const {
        if (S.rows() != S.cols())
            throw ShapeError("SignalGenerator: S must be square");
        if (L.rows() != 1 || L.cols() != S.rows())
            throw ShapeError("SignalGenerator: L must be 1 x nu");
        if (omega0.size() != S.rows())
            throw ShapeError("SignalGenerator: omega0 must have length nu");
    }
};

inline bool is_observable(const Matrix& l, const Matrix& s) {
    return observability_rank(l, s) == s.rows();
}

// Jordan block at s1 of order m, sign-normalized so that the moment row of a
// Sylvester solve reads (eta_0, ..., eta_{m-1}) directly: the superdiagonal
// carries -1 and L is the first canonical row. (With +1 the entries of C*Pi
// alternate in sign relative to the derivative moments.)
inline Matrix jordan_block(double s1, Index m) {
    Matrix s = s1 * Matrix::Identity(m, m);
    for (Index i = 0; i + 1 < m; ++i)
        s(i, i + 1) = -1.0;
    return s;
}

inline Matrix first_canonical_row(Index m) {
    Matrix l = Matrix::Zero(1, m);
    l(0, 0) = 1.0;
    return l;
}

/// Generator of a Jordan interpolation structure at a real point s1.
/// Default initial condition gives theta(t) = e^{s1 t}.
inline SignalGenerator make_jordan(double s1, Index m) {
    if (m < 1)
        throw ShapeError("make_jordan: order must be >= 1");
    SignalGenerator g;
    g.S = jordan_block(s1, m);
    g.L = first_canonical_row(m);
    g.omega0 = Vector::Zero(m);
    g.omega0(0) = 1.0;
    return g;
}

/// Complex interpolation point: the conjugate pair s1, conj(s1) is carried in
/// real block-Jordan form of dimension 2m (2x2 rotation blocks on the
/// diagonal, -I2 couplings on the superdiagonal).
inline SignalGenerator make_jordan(Complex s1, Index m) {
    if (std::abs(s1.imag()) == 0.0)
        return make_jordan(s1.real(), m);
    if (m < 1)
        throw ShapeError("make_jordan: order must be >= 1");
    const Index nu = 2 * m;
    Matrix s = Matrix::Zero(nu, nu);
    for (Index b = 0; b < m; ++b) {
        s(2 * b, 2 * b) = s1.real();
        s(2 * b + 1, 2 * b + 1) = s1.real();
        s(2 * b, 2 * b + 1) = s1.imag();
        s(2 * b + 1, 2 * b) = -s1.imag();
        if (b + 1 < m) {
            s(2 * b, 2 * b + 2) = -1.0;
            s(2 * b + 1, 2 * b + 3) = -1.0;
        }
    }
    SignalGenerator g;
    g.S = s;
    g.L = first_canonical_row(nu);
    g.omega0 = Vector::Zero(nu);
    g.omega0(0) = 1.0;
    return g;
}

/// Polynomial reference t^k: S is the nilpotent Jordan block of order k+1 at
/// zero; omega0 is chosen so that theta(t) = t^k exactly.
inline SignalGenerator make_polynomial(Index k) {
    if (k < 0)
        throw ShapeError("make_polynomial: k must be >= 0");
    SignalGenerator g = make_jordan(0.0, k + 1);
    g.omega0 = Vector::Zero(k + 1);
    double fact = 1.0;
    for (Index i = 1; i <= k; ++i)
        fact *= static_cast<double>(i);
    g.omega0(k) = (k % 2 == 0 ? fact : -fact); // (-1)^k k!
    return g;
}

inline SignalGenerator make_step() { return make_polynomial(0); }
inline SignalGenerator make_ramp() { return make_polynomial(1); }

/// Sinusoidal reference at frequency w: sigma(S) = {+jw, -jw},
/// theta(t) = cos(w t) with the default omega0 = (1, 0).
inline SignalGenerator make_sinusoid(double w) {
    if (!(w > 0.0))
        throw ShapeError("make_sinusoid: frequency must be positive");
    SignalGenerator g;
    g.S = Matrix(2, 2);
    g.S << 0.0, w, -w, 0.0;
    g.L = Matrix(1, 2);
    g.L << 1.0, 0.0;
    g.omega0 = Vector(2);
    g.omega0 << 1.0, 0.0;
    return g;
}

// ---------------------------------------------------------------------------
// Two-block composition (upper-triangular coupling S3)
// ---------------------------------------------------------------------------

struct BlockGenerator {
    std::vector<SignalGenerator> blocks; // two blocks
    Matrix s3;                           // nu1 x nu2 coupling, zero by default

    Index dim() const { return blocks[0].dim() + blocks[1].dim(); }

    Matrix stacked_S() const {
        const Index n1 = blocks[0].dim();
        const Index n2 = blocks[1].dim();
        Matrix s = Matrix::Zero(n1 + n2, n1 + n2);
        s.topLeftCorner(n1, n1) = blocks[0].S;
        s.bottomRightCorner(n2, n2) = blocks[1].S;
        if (s3.size() > 0)
            s.topRightCorner(n1, n2) = s3;
        return s;
    }

    Matrix stacked_L() const {
        Matrix l(1, dim());
        l.leftCols(blocks[0].dim()) = blocks[0].L;
        l.rightCols(blocks[1].dim()) = blocks[1].L;
        return l;
    }

    bool combined_observable() const { return is_observable(stacked_L(), stacked_S()); }

    /// Materialize the stacked generator; requires combined observability.
    SignalGenerator combined() const {
        if (!combined_observable())
            throw NotObservable("BlockGenerator: stacked pair (L, S) is not observable");
        SignalGenerator g;
        g.S = stacked_S();
        g.L = stacked_L();
        g.omega0 = Vector(dim());
        g.omega0 << blocks[0].omega0, blocks[1].omega0;
        return g;
    }
};

/// Stack two generators with optional coupling S3 in the upper-right block.
/// Throws NotObservable when the composed pair fails the rank test (e.g. two
/// Jordan blocks sharing an eigenvalue).
inline BlockGenerator compose(const SignalGenerator& g1, const SignalGenerator& g2,
                              const Matrix& s3 = Matrix()) {
    if (s3.size() > 0 && (s3.rows() != g1.dim() || s3.cols() != g2.dim()))
        throw ShapeError("compose: S3 must be nu1 x nu2");
    BlockGenerator bg;
    bg.blocks = {g1, g2};
    bg.s3 = s3;
    if (!bg.combined_observable()) {
        std::ostringstream os;
        os << "compose: combined pair of dimensions " << g1.dim() << "+" << g2.dim()
           << " is not observable";
        throw NotObservable(os.str());
    }
    return bg;
}

// ---------------------------------------------------------------------------
// Trajectories and persistence
// ---------------------------------------------------------------------------

/// theta(t_i) = L expm(S t_i) omega0. Times must be nonnegative ascending.
inline Vector trajectory(const SignalGenerator& g, const Vector& times) {
    g.validate();
    for (Index i = 0; i < times.size(); ++i) {
        if (times(i) < 0.0 || (i > 0 && times(i) < times(i - 1)))
            throw ShapeError("trajectory: times must be nonnegative and ascending");
    }
    Vector out(times.size());
    for (Index i = 0; i < times.size(); ++i)
        out(i) = (g.L * expm(g.S, times(i)) * g.omega0)(0, 0);
    return out;
}

/// Persistent signal: sigma(S) on the imaginary axis and the triplet
/// (L, S, omega0) minimal (observable pair, cyclic initial condition).
inline bool is_persistent(const SignalGenerator& g) {
    g.validate();
    const ComplexVector eigs = eigenvalues(g.S);
    const double tol = kEigTolFactor * std::max(g.S.norm(), 1.0);
    for (Index i = 0; i < eigs.size(); ++i)
        if (std::abs(eigs(i).real()) > tol)
            return false;
    if (!is_observable(g.L, g.S))
        return false;
    return controllability_rank(g.S, g.omega0) == g.dim();
}

} // namespace mmred
