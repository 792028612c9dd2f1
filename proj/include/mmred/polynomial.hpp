#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mmred/lti.hpp"

namespace mmred {

// Polynomials are coefficient vectors in ascending powers: p(s) = sum c[k] s^k.
using Poly = Eigen::VectorXd;

inline Complex polyval(const Poly& p, Complex s) {
    Complex acc(0.0, 0.0);
    for (Index i = p.size() - 1; i >= 0; --i)
        acc = acc * s + p(i);
    return acc;
}

inline Poly polymul(const Poly& a, const Poly& b) {
    if (a.size() == 0 || b.size() == 0)
        return Poly::Zero(1);
    Poly out = Poly::Zero(a.size() + b.size() - 1);
    for (Index i = 0; i < a.size(); ++i)
        for (Index j = 0; j < b.size(); ++j)
            out(i + j) += a(i) * b(j);
    return out;
}

inline Poly polyadd(const Poly& a, const Poly& b) {
    Poly out = Poly::Zero(std::max(a.size(), b.size()));
    out.head(a.size()) += a;
    out.head(b.size()) += b;
    return out;
}

inline Poly polysub(const Poly& a, const Poly& b) {
    Poly out = Poly::Zero(std::max(a.size(), b.size()));
    out.head(a.size()) += a;
    out.head(b.size()) -= b;
    return out;
}

/// Drop leading (highest-power) coefficients below rel_tol of the largest.
inline Poly polytrim(const Poly& p, double rel_tol = 1e-12) {
    if (p.size() == 0)
        return Poly::Zero(1);
    const double scale = p.cwiseAbs().maxCoeff();
    Index deg = p.size() - 1;
    while (deg > 0 && std::abs(p(deg)) <= rel_tol * scale)
        --deg;
    return p.head(deg + 1);
}

inline Index poly_degree(const Poly& p) { return polytrim(p).size() - 1; }

/// Real-coefficient polynomial from a conjugate-closed root multiset.
inline Poly poly_from_roots(const std::vector<Complex>& roots) {
    std::vector<Complex> coeffs{Complex(1.0, 0.0)};
    for (const Complex& r : roots) {
        std::vector<Complex> next(coeffs.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i] * (-r);
            next[i + 1] += coeffs[i];
        }
        coeffs = std::move(next);
    }
    Poly out(static_cast<Index>(coeffs.size()));
    for (std::size_t i = 0; i < coeffs.size(); ++i)
        out(static_cast<Index>(i)) = coeffs[i].real();
    return out;
}

/// Roots via the companion-matrix eigenvalues.
inline std::vector<Complex> poly_roots(const Poly& p_in) {
    const Poly p = polytrim(p_in);
    const Index deg = p.size() - 1;
    if (deg <= 0)
        return {};
    Matrix comp = Matrix::Zero(deg, deg);
    for (Index i = 0; i < deg; ++i)
        comp(0, i) = -p(deg - 1 - i) / p(deg);
    for (Index i = 1; i < deg; ++i)
        comp(i, i - 1) = 1.0;
    const ComplexVector eigs = eigenvalues(comp);
    return {eigs.data(), eigs.data() + eigs.size()};
}

// ---------------------------------------------------------------------------
// Transfer fractions
// ---------------------------------------------------------------------------

struct TransferFraction {
    Poly num;
    Poly den;
    int cancelled = 0; // number of common factors removed

    bool proper() const { return poly_degree(num) <= poly_degree(den); }
    Index order() const { return std::max(poly_degree(num), poly_degree(den)); }
    Complex eval(Complex s) const { return polyval(num, s) / polyval(den, s); }
};

/// Numerator/denominator of a realization. The denominator is the monic
/// characteristic polynomial (from the eigenvalues); the strictly-proper
/// numerator is recovered by inverse DFT of P(s)*den(s) sampled on a circle
/// enclosing the spectrum (a perfectly conditioned Vandermonde system).
inline TransferFraction realization_to_fraction(const Realization& sys) {
    sys.validate();
    const Index n = sys.order();
    TransferFraction tf;
    if (n == 0) {
        tf.num = Poly::Constant(1, sys.D);
        tf.den = Poly::Constant(1, 1.0);
        return tf;
    }
    const ComplexVector eigs = eigenvalues(sys.A);
    tf.den = poly_from_roots({eigs.data(), eigs.data() + eigs.size()});

    double radius = 2.0 * std::max(1.0, eigs.cwiseAbs().maxCoeff());
    // keep sample points away from poles
    for (int attempt = 0; attempt < 8; ++attempt) {
        double min_dist = radius;
        for (Index i = 0; i < n; ++i)
            min_dist = std::min(min_dist, std::abs(radius - std::abs(eigs(i))));
        if (min_dist > 1e-3 * radius)
            break;
        radius *= 1.37;
    }

    const Index m = n; // deg(num_sp) <= n-1: n samples determine it exactly
    ComplexVector samples(m);
    std::vector<Complex> points(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) {
        const double th = 2.0 * std::numbers::pi * (static_cast<double>(j) + 0.5) /
                          static_cast<double>(m);
        const Complex sj = radius * Complex(std::cos(th), std::sin(th));
        points[static_cast<std::size_t>(j)] = sj;
        samples(j) = (eval_transfer(sys, sj) - Complex(sys.D, 0.0)) * polyval(tf.den, sj);
    }
    // c_k = (1/m) sum_j samples_j * conj(w_j^k) / radius^k  (inverse DFT)
    Poly num_sp = Poly::Zero(n);
    for (Index k = 0; k < n; ++k) {
        Complex acc(0.0, 0.0);
        for (Index j = 0; j < m; ++j) {
            const Complex wjk = std::pow(points[static_cast<std::size_t>(j)] / radius,
                                         static_cast<double>(k));
            acc += samples(j) * std::conj(wjk);
        }
        num_sp(k) = (acc / static_cast<double>(m)).real() / std::pow(radius, static_cast<double>(k));
    }
    tf.num = polytrim(polyadd(num_sp, sys.D * tf.den));
    tf.den = polytrim(tf.den);
    return tf;
}

/// Cancel root pairs of num and den closer than `tol`. Root pairs in the
/// ambiguous band (tol, 10 tol] are refused rather than guessed.
inline TransferFraction cancel_common_factors(const TransferFraction& tf, double tol) {
    std::vector<Complex> nr = poly_roots(tf.num);
    std::vector<Complex> dr = poly_roots(tf.den);
    const double num_lead = polytrim(tf.num)(polytrim(tf.num).size() - 1);
    const double den_lead = polytrim(tf.den)(polytrim(tf.den).size() - 1);

    int cancelled = 0;
    for (auto it = nr.begin(); it != nr.end();) {
        auto best = dr.end();
        double best_dist = std::numeric_limits<double>::infinity();
        for (auto jt = dr.begin(); jt != dr.end(); ++jt) {
            const double d = std::abs(*it - *jt);
            if (d < best_dist) {
                best_dist = d;
                best = jt;
            }
        }
        if (best != dr.end() && best_dist <= tol) {
            it = nr.erase(it);
            dr.erase(best);
            ++cancelled;
        } else if (best != dr.end() && best_dist <= 10.0 * tol) {
            std::ostringstream os;
            os << "cancel_common_factors: root pair at distance " << best_dist
               << " falls inside the ambiguous band (tol " << tol << ")";
            throw CancellationUnsafe(os.str());
        } else {
            ++it;
        }
    }
    TransferFraction out;
    out.num = poly_from_roots(nr) * num_lead;
    out.den = poly_from_roots(dr) * den_lead;
    out.cancelled = cancelled;
    return out;
}

} // namespace mmred
