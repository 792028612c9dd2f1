#pragma once

#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "mmred/optim.hpp"
#include "mmred/signal_generator.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// Moments via Sylvester solves
// ---------------------------------------------------------------------------

/// Moments of a system at sigma(S), carried as the row C*Pi together with the
/// solution certificate.
struct MomentSet {
    SignalGenerator generator;
    Eigen::RowVectorXcd values; // = C * Pi
    SylvesterSolution pi;
};

inline MomentSet moments_of(const Realization& sys, const SignalGenerator& g) {
    sys.validate();
    g.validate();
    if (!is_observable(g.L, g.S))
        throw NotObservable("moments_of: generator pair (L, S) is not observable");
    MomentSet ms;
    ms.generator = g;
    ms.pi = solve_sylvester(sys.A, sys.B, g.L, g.S);
    ms.values = sys.C.cast<Complex>() * ms.pi.pi;
    return ms;
}

// ---------------------------------------------------------------------------
// The reduced-model family parametrized by the free column G
// ---------------------------------------------------------------------------

/// Member of the family (S - G L, G, H). For H = C*Pi the model matches the
/// source system's moments at sigma(S); for H = L it tracks the generator.
struct ReducedModel {
    Matrix S; // nu x nu
    Matrix L; // 1 x nu
    Matrix G; // nu x 1
    Matrix H; // 1 x nu

    Matrix F() const { return S - G * L; }
    Realization realization() const { return make_realization(F(), G, H, 0.0); }
    bool stable(double margin = 0.0) const { return spectral_abscissa(F()) < -margin; }
};

/// Reduce `sys` at the interpolation data of `g`: H = C*Pi, so the returned
/// model's moments at sigma(S) equal the source's.
inline ReducedModel reduce(const Realization& sys, const SignalGenerator& g, const Matrix& G) {
    if (G.rows() != g.dim() || G.cols() != 1)
        throw ShapeError("reduce: G must be nu x 1");
    const MomentSet ms = moments_of(sys, g);
    ReducedModel rm{g.S, g.L, G, ms.values.real()};
    const double gap = min_spectral_gap(rm.F(), g.S);
    if (gap < eig_tolerance(rm.F(), g.S)) {
        std::ostringstream os;
        os << "reduce: sigma(S - G L) meets sigma(S) (gap " << gap << "); pick another G";
        throw SpectraOverlap(os.str());
    }
    return rm;
}

/// The stable tracking subfamily: (S - G L, G, L). Output tracks theta(t) for
/// any initial condition. Requires sigma(S - G L) in the open left half plane.
inline ReducedModel tracking_family(const SignalGenerator& g, const Matrix& G) {
    if (G.rows() != g.dim() || G.cols() != 1)
        throw ShapeError("tracking_family: G must be nu x 1");
    ReducedModel rm{g.S, g.L, G, g.L};
    const double abscissa = spectral_abscissa(rm.F());
    if (abscissa >= 0.0) {
        std::ostringstream os;
        os << "tracking_family: sigma(S - G L) has abscissa " << abscissa
           << " >= 0; model is outside the stable subfamily";
        throw Unstable(os.str());
    }
    return rm;
}

/// Basis-independent moment comparison: eta_0..eta_{m-1} of both systems at
/// each distinct eigenvalue of S (m = its algebraic multiplicity), via
/// resolvent powers. Returns the max relative deviation.
inline double moment_mismatch(const Realization& a, const Realization& b, const Matrix& s) {
    const ComplexVector eigs = eigenvalues(s);
    const double tol = kEigTolFactor * std::max(spectral_radius(s), 1.0);
    std::vector<Complex> distinct;
    std::vector<int> mult;
    for (Index i = 0; i < eigs.size(); ++i) {
        bool found = false;
        for (std::size_t j = 0; j < distinct.size(); ++j) {
            if (std::abs(eigs(i) - distinct[j]) < std::max(tol, 1e-7)) {
                ++mult[j];
                found = true;
                break;
            }
        }
        if (!found) {
            distinct.push_back(eigs(i));
            mult.push_back(1);
        }
    }
    double worst = 0.0;
    for (std::size_t j = 0; j < distinct.size(); ++j) {
        for (int k = 0; k < mult[j]; ++k) {
            const Complex ma = moment_resolvent(a, distinct[j], k);
            const Complex mb = moment_resolvent(b, distinct[j], k);
            worst = std::max(worst, std::abs(ma - mb) / std::max(1.0, std::abs(ma)));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Tracking condition (necessary and sufficient): L = C*Pi
// ---------------------------------------------------------------------------

struct TrackingReport {
    double residual_inf = 0.0; // ||L - C Pi||_inf
    bool tracks = false;
    double tol = 0.0;
    // Per-block results when checked against a two-block generator.
    std::vector<double> block_residuals;
    std::vector<bool> block_verdicts;
};

inline TrackingReport check_tracking_condition(const Realization& sys, const SignalGenerator& g,
                                               double tol = 1e-8) {
    sys.validate();
    if (!is_stable(sys))
        throw Unstable("check_tracking_condition: system must be asymptotically stable");
    if (!is_persistent(g))
        throw NotPersistent("check_tracking_condition: generator output is not persistent");
    const MomentSet ms = moments_of(sys, g);
    TrackingReport rep;
    rep.tol = tol;
    rep.residual_inf = (g.L.cast<Complex>() - ms.values).cwiseAbs().maxCoeff();
    rep.tracks = rep.residual_inf < tol;
    return rep;
}

/// Block-wise verdicts: each block is checked on its own (the combined
/// verdict equals the conjunction when S3 = 0).
inline TrackingReport check_tracking_condition(const Realization& sys, const BlockGenerator& bg,
                                               double tol = 1e-8) {
    sys.validate();
    if (!is_stable(sys))
        throw Unstable("check_tracking_condition: system must be asymptotically stable");
    TrackingReport rep;
    rep.tol = tol;
    rep.residual_inf = 0.0;
    for (const SignalGenerator& g : bg.blocks) {
        const MomentSet ms = moments_of(sys, g);
        const double r = (g.L.cast<Complex>() - ms.values).cwiseAbs().maxCoeff();
        rep.block_residuals.push_back(r);
        rep.block_verdicts.push_back(r < tol);
        rep.residual_inf = std::max(rep.residual_inf, r);
    }
    rep.tracks = rep.residual_inf < tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Free-parameter design
// ---------------------------------------------------------------------------

/// Observer-gain placement for the single-output pair (L, S): returns G with
/// sigma(S - G L) equal to the requested (conjugate-closed) pole set.
/// Ackermann's formula on the dual controllable pair, with a condition guard.
inline Matrix design_G(const Matrix& s, const Matrix& l, const std::vector<Complex>& poles) {
    require_square(s, "S");
    const Index nu = s.rows();
    if (l.rows() != 1 || l.cols() != nu)
        throw ShapeError("design_G: L must be 1 x nu");
    if (static_cast<Index>(poles.size()) != nu)
        throw ShapeError("design_G: need exactly nu desired poles");
    if (!is_observable(l, s))
        throw NotObservable("design_G: pair (L, S) is not observable");

    // Conjugate closure: the desired characteristic polynomial must be real.
    std::vector<Complex> sorted(poles);
    std::vector<Complex> coeffs{1.0}; // monic, ascending in construction below
    for (const Complex& p : sorted) {
        std::vector<Complex> next(coeffs.size() + 1, Complex(0.0, 0.0));
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            next[i] += coeffs[i] * (-p);
            next[i + 1] += coeffs[i];
        }
        coeffs = std::move(next);
    }
    Vector q(nu + 1); // q[i] = coefficient of s^i
    for (Index i = 0; i <= nu; ++i) {
        const Complex c = coeffs[static_cast<std::size_t>(i)];
        if (std::abs(c.imag()) > 1e-9 * (1.0 + std::abs(c.real())))
            throw ShapeError("design_G: desired poles are not closed under conjugation");
        q(i) = c.real();
    }

    Matrix obs(nu, nu);
    Matrix row = l;
    for (Index k = 0; k < nu; ++k) {
        obs.row(k) = row;
        row = row * s;
    }
    Eigen::JacobiSVD<Matrix> svd(obs);
    const double cond = svd.singularValues()(0) / svd.singularValues()(nu - 1);
    if (!std::isfinite(cond) || cond > 1e12)
        throw PlacementFailed("design_G: observability matrix too ill-conditioned for placement");

    // q(S) by Horner in the matrix argument.
    Matrix qs = Matrix::Zero(nu, nu);
    for (Index i = nu; i >= 0; --i)
        qs = qs * s + q(i) * Matrix::Identity(nu, nu);

    Vector en = Vector::Zero(nu);
    en(nu - 1) = 1.0;
    Matrix g = qs * obs.partialPivLu().solve(en);

    // Post-verify the achieved spectrum (sorted complex comparison).
    ComplexVector achieved = eigenvalues(s - g * l);
    std::vector<Complex> got(achieved.data(), achieved.data() + achieved.size());
    auto lex = [](const Complex& a, const Complex& b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    };
    std::sort(got.begin(), got.end(), lex);
    std::sort(sorted.begin(), sorted.end(), lex);
    for (Index i = 0; i < nu; ++i) {
        if (std::abs(got[static_cast<std::size_t>(i)] - sorted[static_cast<std::size_t>(i)]) >
            1e-6) {
            std::ostringstream os;
            os << "design_G: achieved spectrum deviates from request by "
               << std::abs(got[static_cast<std::size_t>(i)] - sorted[static_cast<std::size_t>(i)]);
            throw PlacementFailed(os.str());
        }
    }
    return g;
}

// ---------------------------------------------------------------------------
// Stabilization of a parametrized matrix family by spectral-abscissa descent
// ---------------------------------------------------------------------------

struct StabilizeOptions {
    double margin = 0.0;   // require abscissa < -margin
    int starts = 64;       // multi-start count
    long budget = 60000;   // total objective evaluations
    std::uint64_t seed = 7;
    double scale = -1.0;   // Gaussian start scale; <0 means auto
    std::vector<Vector> hints; // extra start points tried first
};

struct StabilizeOutcome {
    Vector g;
    double abscissa;
    long evals = 0;
    std::vector<double> trace; // best abscissa after each start
};

/// Randomized multi-start + Nelder-Mead descent on the spectral abscissa of
/// family(g). Deterministic under the fixed seed. Throws BudgetExhausted
/// (carrying the best abscissa and trace) when no g meets the margin.
inline StabilizeOutcome design_G_stabilize(const std::function<Matrix(const Vector&)>& family,
                                           Index dim, const StabilizeOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    double scale = opt.scale;
    if (scale <= 0.0) {
        const Matrix probe = family(Vector::Zero(dim));
        scale = std::max(1.0, probe.norm() / std::sqrt(static_cast<double>(probe.rows())));
    }

    StabilizeOutcome best;
    best.abscissa = std::numeric_limits<double>::infinity();
    long evals_left = opt.budget;

    auto objective = [&](const Vector& g) { return spectral_abscissa(family(g)); };

    std::vector<Vector> starts(opt.hints);
    for (int k = static_cast<int>(starts.size()); k < opt.starts; ++k) {
        Vector g(dim);
        const double s = scale * std::pow(2.0, (k % 5) - 2); // spread of scales
        for (Index i = 0; i < dim; ++i)
            g(i) = s * gauss(rng);
        starts.push_back(std::move(g));
    }

    for (const Vector& g0 : starts) {
        if (evals_left <= 0)
            break;
        NelderMeadOptions nm;
        nm.max_evals = std::min<long>(evals_left, 250L * static_cast<long>(dim));
        nm.target = -opt.margin - 1e-9;
        NelderMeadResult r = nelder_mead(objective, g0, nm);
        evals_left -= r.evals;
        best.evals += r.evals;
        if (r.f < best.abscissa) {
            best.abscissa = r.f;
            best.g = r.x;
        }
        best.trace.push_back(best.abscissa);
        if (best.abscissa < -opt.margin)
            break;
    }

    if (!(best.abscissa < -opt.margin)) {
        std::ostringstream os;
        os << "design_G_stabilize: no parameter with abscissa < " << -opt.margin
           << " found within budget (best " << best.abscissa << ")";
        throw BudgetExhausted(os.str(), best.abscissa, best.trace);
    }
    return best;
}

/// Overload for the plain observer-form family S - G L: placement is tried
/// first and the randomized search only runs as a fallback.
inline StabilizeOutcome design_G_stabilize(const Matrix& s, const Matrix& l,
                                           const StabilizeOptions& opt = {}) {
    const Index nu = s.rows();
    if (is_observable(l, s)) {
        std::vector<Complex> poles;
        const double base = std::max(2.0 * opt.margin, 0.5);
        for (Index i = 0; i < nu; ++i)
            poles.emplace_back(-base * (1.0 + 0.5 * static_cast<double>(i)), 0.0);
        try {
            Matrix g = design_G(s, l, poles);
            StabilizeOutcome out;
            out.g = g;
            out.abscissa = spectral_abscissa(s - g * l);
            out.trace.push_back(out.abscissa);
            if (out.abscissa < -opt.margin)
                return out;
        } catch (const PlacementFailed&) {
            // fall through to the randomized search
        }
    }
    auto family = [&](const Vector& g) -> Matrix { return s - g * l; };
    return design_G_stabilize(family, nu, opt);
}

} // namespace mmred
