// Test-only oracles, deliberately independent of the library code paths they
// check: a hand-rolled Kronecker-vectorized Sylvester solve, finite-difference
// derivatives, and randomized system/generator factories.
#pragma once

#include <complex>
#include <random>
#include <vector>

#include "mmred/lti.hpp"
#include "mmred/signal_generator.hpp"

namespace oracles {

using mmred::Complex;
using mmred::Index;
using mmred::Matrix;
using mmred::Vector;

// Row-major manual Kronecker product (different loop order from the library).
inline Matrix kron_ref(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() * b.rows(), a.cols() * b.cols());
    for (Index br = 0; br < b.rows(); ++br)
        for (Index bc = 0; bc < b.cols(); ++bc)
            for (Index ar = 0; ar < a.rows(); ++ar)
                for (Index ac = 0; ac < a.cols(); ++ac)
                    out(ar * b.rows() + br, ac * b.cols() + bc) = a(ar, ac) * b(br, bc);
    return out;
}

// Dense brute-force Sylvester solve via column-stacked vectorization and a
// Householder QR factorization (the library uses full-pivot LU).
inline Matrix sylvester_bruteforce(const Matrix& a, const Matrix& b, const Matrix& l,
                                   const Matrix& s) {
    const Index n = a.rows();
    const Index nu = s.rows();
    Matrix op = kron_ref(Matrix::Identity(nu, nu), a) -
                kron_ref(s.transpose(), Matrix::Identity(n, n));
    Matrix bl = b * l;
    Vector rhs(n * nu);
    for (Index j = 0; j < nu; ++j)
        rhs.segment(j * n, n) = -bl.col(j);
    Vector x = op.colPivHouseholderQr().solve(rhs);
    Matrix pi(n, nu);
    for (Index j = 0; j < nu; ++j)
        pi.col(j) = x.segment(j * n, n);
    return pi;
}

// Central finite-difference k-th derivative of a transfer function.
inline Complex fd_derivative(const mmred::Realization& sys, Complex s0, int k, double h) {
    auto f = [&](Complex s) { return mmred::eval_transfer(sys, s); };
    switch (k) {
    case 0:
        return f(s0);
    case 1:
        return (f(s0 + h) - f(s0 - h)) / (2.0 * h);
    case 2:
        return (f(s0 + h) - 2.0 * f(s0) + f(s0 - h)) / (h * h);
    case 3:
        return (f(s0 + 2.0 * h) - 2.0 * f(s0 + h) + 2.0 * f(s0 - h) - f(s0 - 2.0 * h)) /
               (2.0 * h * h * h);
    default:
        throw std::invalid_argument("fd_derivative: k <= 3 only");
    }
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i)
        f *= i;
    return f;
}

// Random stable system with eigenvalues in [-spread-0.3, -0.3], mixed real
// and complex, conjugated through a random well-conditioned similarity.
inline mmred::Realization random_stable_system(std::mt19937_64& rng, Index n,
                                               double spread = 2.0) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Matrix a = Matrix::Zero(n, n);
    Index i = 0;
    while (i < n) {
        const double re = -0.3 - spread * uni(rng);
        if (i + 1 < n && uni(rng) < 0.4) {
            const double im = 0.2 + spread * uni(rng);
            a(i, i) = re;
            a(i + 1, i + 1) = re;
            a(i, i + 1) = im;
            a(i + 1, i) = -im;
            i += 2;
        } else {
            a(i, i) = re;
            i += 1;
        }
    }
    Matrix t(n, n);
    for (Index r = 0; r < n; ++r)
        for (Index c = 0; c < n; ++c)
            t(r, c) = gauss(rng);
    t += 3.0 * Matrix::Identity(n, n); // keep the similarity well conditioned
    a = t.partialPivLu().solve(a * t);

    mmred::Realization sys;
    sys.A = a;
    sys.B = Matrix(n, 1);
    sys.C = Matrix(1, n);
    for (Index r = 0; r < n; ++r) {
        sys.B(r, 0) = gauss(rng);
        sys.C(0, r) = gauss(rng);
    }
    sys.D = 0.0;
    return sys;
}

// Random persistent generator: step, ramp, sinusoid, or step (+) sinusoid.
inline mmred::SignalGenerator random_persistent_generator(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double pick = uni(rng);
    if (pick < 0.3)
        return mmred::make_step();
    if (pick < 0.5)
        return mmred::make_ramp();
    if (pick < 0.8)
        return mmred::make_sinusoid(0.5 + 2.0 * uni(rng));
    return mmred::compose(mmred::make_step(), mmred::make_sinusoid(0.5 + 2.0 * uni(rng)))
        .combined();
}

} // namespace oracles
