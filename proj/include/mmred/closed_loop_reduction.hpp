#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mmred/moment_matching.hpp"
#include "mmred/polynomial.hpp"
#include "mmred/simulation.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// Baseline compensator (observer-based output feedback)
// ---------------------------------------------------------------------------

/// Order-n compensator placing the closed-loop spectrum at the given 2n-pole
/// set: the first n poles go to state feedback, the last n to the observer.
/// The returned controller is driven by the loop error eps = r - y, so the
/// closed loop with the plant has spectrum {regulator poles} u {observer poles}.
inline Realization build_compensator(const Realization& plant,
                                     const std::vector<Complex>& poles) {
    plant.validate();
    const Index n = plant.order();
    if (static_cast<Index>(poles.size()) != 2 * n)
        throw ShapeError("build_compensator: need exactly 2n poles");
    if (!is_minimal(plant))
        throw PlacementFailed("build_compensator: plant is not minimal");

    const std::vector<Complex> reg(poles.begin(), poles.begin() + n);
    const std::vector<Complex> obs(poles.begin() + n, poles.end());

    Matrix f, lo;
    try {
        // State feedback via the dual of observer placement: (A^T, B^T) pair.
        f = design_G(plant.A.transpose(), plant.B.transpose(), reg).transpose();
    } catch (const NotObservable&) {
        throw PlacementFailed("build_compensator: plant is not controllable");
    }
    try {
        lo = design_G(plant.A, plant.C, obs);
    } catch (const NotObservable&) {
        throw PlacementFailed("build_compensator: plant is not observable");
    }

    Realization k;
    k.A = plant.A - plant.B * f - lo * plant.C;
    k.B = lo;
    k.C = f;
    k.D = 0.0;
    return k;
}

// ---------------------------------------------------------------------------
// Interpolation structure for the closed-loop pipeline
// ---------------------------------------------------------------------------

/// Extend the reference's mode structure to a two-block generator with
/// dim S1 = n (reference block) and dim S2 = nu_c (controller block).
inline BlockGenerator make_interpolation_blocks(const SignalGenerator& reference, Index n,
                                                Index nu_c) {
    reference.validate();
    const ComplexVector modes = eigenvalues(reference.S);
    const double tol = 1e-9 * std::max(1.0, reference.S.norm());
    const bool all_zero = modes.cwiseAbs().maxCoeff() <= tol;

    auto block_at = [&](Index dim) -> SignalGenerator {
        if (all_zero)
            return make_jordan(0.0, dim);
        // sinusoidal reference: one conjugate pair, extended in multiplicity
        if (reference.dim() == 2) {
            const double w = std::abs(modes(0).imag());
            if (w > tol && std::abs(modes(0).real()) <= tol) {
                if (dim % 2 != 0)
                    throw ShapeError(
                        "make_interpolation_blocks: sinusoidal reference needs even block size");
                return make_jordan(Complex(0.0, w), dim / 2);
            }
        }
        throw ShapeError("make_interpolation_blocks: unsupported reference mode structure");
    };

    BlockGenerator bg;
    bg.blocks = {block_at(n), block_at(nu_c)};
    bg.s3 = Matrix(); // block-diagonal S
    return bg;
}

// ---------------------------------------------------------------------------
// Design record and verification report
// ---------------------------------------------------------------------------

struct VerificationReport {
    double stability_abscissa = 0.0;
    double moment_residual_pcl = 0.0; // || moments(P_hat) - L1 ||_inf at the reference block
    double moment_residual_e = 0.0;   // || moments(E_hat) ||_inf at the reference block
    double tracking_sim_error = 0.0;  // tail error of the simulated loop
    std::vector<double> interpolation_residuals;
    double tol_moments = 1e-6;
    double tracking_threshold = 0.0;
    bool verdict = false;    // all checks pass
    bool consistent = false; // the three tracking checks agree with each other
};

struct ClosedLoopDesign {
    Realization plant;
    Realization controller;
    LoopSet full_loop;
    BlockGenerator generator;    // interpolation blocks (S1, S2), S3 = 0
    SignalGenerator reference;   // the actual reference signal to track
    Matrix pi1;                  // plant-state rows of the full-loop solve at (L1, S1)
    Matrix pi2;                  // controller Sylvester solution at (L2, S2)
    RowVector full_loop_data;    // C_cl * Pi at (L1, S1): the full loop's moment row
    Matrix g;                    // stacked free parameter (G1; G2)
    Realization reduced_loop;    // structured closed-loop assembly
    Realization normative_loop;  // plain family (S - G L, G, H) with the same G
    Realization controller_block; // embedded reduced controller (S2-G2L2, G2, Ck Pi2, Dk)
    TransferFraction extracted_controller;
    bool extraction_improper = false;
    VerificationReport report;
    bool paper_literal = false;
    std::vector<std::string> notes;

    Index nu_c() const { return generator.blocks[1].dim(); }
};

struct ReduceLoopOptions {
    std::uint64_t seed = 7;
    double margin = 0.05;        // required stability margin of the reduced loop
    long budget = 120000;        // stabilization search budget
    bool try_g1_equals_b = true; // attempt the G1 = B selection first
    bool paper_literal = false;  // literal (2,1)/output data instead of the L1 pin
    double certify_tol = 1e-6;
    double horizon = -1.0;       // <0: auto
    double dt = 0.01;
    double cancel_tol = 1e-6;    // controller-extraction cancellation tolerance
};

// ---------------------------------------------------------------------------
// Controller extraction (rational algebra)
// ---------------------------------------------------------------------------

/// K_hat(s) = P_hat(s) / ( P(s) (1 - P_hat(s)) ) as a polynomial fraction with
/// common factors cancelled to `tol`. An improper result is returned with its
/// degrees intact; use `proper()` to inspect.
inline TransferFraction extract_controller(const Realization& plant,
                                           const Realization& reduced_loop, double tol) {
    const TransferFraction p = realization_to_fraction(plant);
    const TransferFraction pcl = realization_to_fraction(reduced_loop);
    const Poly one_minus = polysub(pcl.den, pcl.num); // (d - n)/d = 1 - P_hat
    if (polytrim(one_minus).cwiseAbs().maxCoeff() < 1e-14)
        throw IllPosed("extract_controller: 1 - P_hat vanishes identically");
    if (polytrim(p.num).cwiseAbs().maxCoeff() < 1e-300)
        throw IllPosed("extract_controller: plant transfer function is zero");
    TransferFraction k;
    k.num = polymul(pcl.num, p.den);
    k.den = polymul(p.num, one_minus);
    return cancel_common_factors(k, tol);
}

// ---------------------------------------------------------------------------
// Certification (Thm-3 style three-way check)
// ---------------------------------------------------------------------------

inline VerificationReport certify(const ClosedLoopDesign& design, double tol = 1e-6,
                                  double horizon = -1.0, double dt = 0.01,
                                  double tracking_threshold = -1.0) {
    const SignalGenerator& s1 = design.generator.blocks[0];
    const Realization& loop = design.reduced_loop;

    VerificationReport rep;
    rep.tol_moments = tol;
    rep.stability_abscissa = spectral_abscissa(loop.A);

    // (2) moments of the reduced closed loop at the reference block vs L1
    const SylvesterSolution pi_hat = solve_sylvester(loop.A, loop.B, s1.L, s1.S);
    const RowVector m_pcl = (loop.C * pi_hat.pi.real());
    RowVector m_full = m_pcl;
    if (loop.D != 0.0)
        m_full(0) += loop.D; // k = 0 moment carries the feedthrough
    rep.moment_residual_pcl = (m_full - s1.L).cwiseAbs().maxCoeff();

    // (3) moments of E_hat = 1 - P_hat at the reference block vs zero
    RowVector m_e = -m_full;
    m_e(0) += 1.0;
    rep.moment_residual_e = m_e.cwiseAbs().maxCoeff();

    for (Index i = 0; i < m_full.cols(); ++i)
        rep.interpolation_residuals.push_back(std::abs(m_full(i) - s1.L(0, i)));

    // (1) simulated tracking of the actual reference
    const double t_end = horizon > 0.0 ? horizon : auto_horizon(loop.A);
    const Trajectory traj = simulate_closed_loop(loop, design.reference, t_end, dt);
    const TrackingVerdict tv = verdict(traj, tracking_threshold);
    rep.tracking_sim_error = tv.tail_error;
    rep.tracking_threshold = tv.threshold;

    const bool stable = rep.stability_abscissa < 0.0;
    const bool m_ok = rep.moment_residual_pcl < tol;
    const bool e_ok = rep.moment_residual_e < tol;
    rep.consistent = (m_ok == e_ok) && (!stable || m_ok == tv.tracks);
    rep.verdict = stable && m_ok && e_ok && tv.tracks;
    return rep;
}

// ---------------------------------------------------------------------------
// The reduction pipeline
// ---------------------------------------------------------------------------

/// Reduce the stable closed loop (plant, controller) at the two-block
/// interpolation structure. The delivered realization is the structured
/// assembly with S3 = 0 and the reference data pinned to L1:
///
///   A_hat = [ S1 - G1 L1     G1 (Ck Pi2) ]     B_hat = [G1]    C_hat = [L1, 0]
///           [ -G2 L1        S2 - G2 L2   ]             [G2]
///
/// so the reduced loop's moments at (L1, S1) equal L1 for every G
/// (Pi = [I; 0] solves the associated Sylvester equation), and tracking of
/// the reference follows once a stabilizing G is found. G is chosen by the
/// spectral-abscissa search, first with G1 = B, then free.
inline ClosedLoopDesign reduce_closed_loop(const Realization& plant,
                                           const Realization& controller,
                                           const BlockGenerator& blocks,
                                           const SignalGenerator& reference,
                                           const ReduceLoopOptions& opt = {}) {
    plant.validate();
    controller.validate();
    const Index n = plant.order();
    const Index nu1 = blocks.blocks[0].dim();
    const Index nu2 = blocks.blocks[1].dim();
    if (nu1 != n)
        throw ShapeError("reduce_closed_loop: dim S1 must equal the plant order");
    if (blocks.s3.size() > 0 && blocks.s3.cwiseAbs().maxCoeff() > 0.0)
        throw ShapeError("reduce_closed_loop: coupling S3 must be zero in the pipeline");

    ClosedLoopDesign design;
    design.plant = plant;
    design.controller = controller;
    design.generator = blocks;
    design.reference = reference;
    design.paper_literal = opt.paper_literal;

    design.full_loop = negative_feedback(plant, controller);
    if (!is_stable(design.full_loop.p_cl))
        throw Unstable("reduce_closed_loop: the full closed loop must be stable");
    if (controller.order() > 0 && nu2 > controller.order())
        design.notes.push_back("nu_C exceeds the controller order: nothing is being reduced");

    const SignalGenerator& g1b = blocks.blocks[0];
    const SignalGenerator& g2b = blocks.blocks[1];

    // Full-loop data at the reference block; Pi1 = plant-state rows.
    const SylvesterSolution pif = solve_sylvester(design.full_loop.p_cl.A,
                                                  design.full_loop.p_cl.B, g1b.L, g1b.S);
    const Matrix pif_r = pif.pi_real();
    design.pi1 = pif_r.topRows(n);
    design.full_loop_data = design.full_loop.p_cl.C * pif_r;
    if (design.full_loop.p_cl.D != 0.0)
        design.full_loop_data(0) += design.full_loop.p_cl.D;

    // Controller data at the S2 block.
    const SylvesterSolution pi2 = solve_sylvester(controller.A, controller.B, g2b.L, g2b.S);
    design.pi2 = pi2.pi_real();
    const Matrix ck_pi2 = controller.C * design.pi2; // 1 x nu2

    if (opt.paper_literal) {
        // The literal Eq. (13) Pi1 solves the homogeneous relation
        // (A - B Dk C) Pi1 = Pi1 S1, which has only the trivial solution when
        // the spectra are disjoint.
        const Matrix m = plant.A - controller.D * (plant.B * plant.C);
        const auto basis = homogeneous_sylvester_basis(m, g1b.S);
        std::ostringstream os;
        os << "paper-literal path: homogeneous relation for Pi1 has kernel dimension "
           << basis.size() << "; its data row cannot reproduce L1, so the full-loop "
           << "Sylvester rows are used for Pi1 and the raw data row C*Pi1 replaces the L1 pin";
        design.notes.push_back(os.str());
    }

    // Data row used in the (2,1) block and the output map: the L1 pin, or the
    // raw full-loop data in the paper-literal variant.
    const RowVector pin_row = opt.paper_literal ? design.full_loop_data : RowVector(g1b.L.row(0));

    auto assemble = [&](const Vector& gvec) -> Realization {
        const Matrix g1 = gvec.head(nu1);
        const Matrix g2 = gvec.tail(nu2);
        Matrix a(nu1 + nu2, nu1 + nu2);
        a.topLeftCorner(nu1, nu1) = g1b.S - g1 * g1b.L;
        a.topRightCorner(nu1, nu2) = g1 * ck_pi2;
        a.bottomLeftCorner(nu2, nu1) = -g2 * pin_row.matrix();
        a.bottomRightCorner(nu2, nu2) = g2b.S - g2 * g2b.L;
        return Realization{a, gvec, (Matrix(1, nu1 + nu2) << pin_row.matrix(),
                                     Matrix::Zero(1, nu2)).finished(),
                           plant.D};
    };

    // --- choose G ---------------------------------------------------------
    std::optional<Vector> chosen;

    if (opt.try_g1_equals_b) {
        auto family_g2 = [&](const Vector& g2) -> Matrix {
            Vector g(nu1 + nu2);
            g << plant.B.col(0), g2;
            return assemble(g).A;
        };
        StabilizeOptions sopt;
        sopt.margin = opt.margin;
        sopt.seed = opt.seed;
        sopt.budget = opt.budget / 4;
        sopt.starts = 24;
        try {
            const StabilizeOutcome out = design_G_stabilize(family_g2, nu2, sopt);
            Vector g(nu1 + nu2);
            g << plant.B.col(0), out.g;
            chosen = g;
            design.notes.push_back("G1 = B selection succeeded");
        } catch (const BudgetExhausted& e) {
            std::ostringstream os;
            os << "G1 = B selection infeasible within budget (best abscissa "
               << e.best_abscissa << "); falling back to a free (G1, G2) search";
            design.notes.push_back(os.str());
        }
    }

    if (!chosen) {
        auto family = [&](const Vector& g) -> Matrix { return assemble(g).A; };
        StabilizeOptions sopt;
        sopt.margin = opt.margin;
        sopt.seed = opt.seed;
        sopt.budget = opt.budget;
        // Block-placement hints: stabilize the diagonal blocks individually.
        try {
            std::vector<Complex> p1, p2;
            const double base = std::max(0.3, 4.0 * opt.margin);
            for (Index i = 0; i < nu1; ++i)
                p1.emplace_back(-base * (1.0 + 0.5 * static_cast<double>(i)), 0.0);
            for (Index i = 0; i < nu2; ++i)
                p2.emplace_back(-base * (1.4 + 0.6 * static_cast<double>(i)), 0.0);
            Vector hint(nu1 + nu2);
            hint << design_G(g1b.S, g1b.L, p1).col(0), design_G(g2b.S, g2b.L, p2).col(0);
            sopt.hints.push_back(hint);
        } catch (const Error&) {
            // hints are best-effort only
        }
        try {
            const StabilizeOutcome out = design_G_stabilize(family, nu1 + nu2, sopt);
            chosen = out.g;
        } catch (const BudgetExhausted& e) {
            std::ostringstream os;
            os << "reduce_closed_loop: no stabilizing G within budget (best abscissa "
               << e.best_abscissa << ", margin " << opt.margin << ")";
            throw Unstable(os.str());
        }
    }

    design.g = *chosen;
    design.reduced_loop = assemble(*chosen);

    // Plain reduced-model family with the same G (normative path): state
    // matrix S - G L, output = pinned row on the reference block, full-loop
    // data on the controller block.
    {
        const SylvesterSolution pif2 = solve_sylvester(design.full_loop.p_cl.A,
                                                       design.full_loop.p_cl.B, g2b.L, g2b.S);
        RowVector data2 = design.full_loop.p_cl.C * pif2.pi_real();
        if (design.full_loop.p_cl.D != 0.0)
            data2(0) += design.full_loop.p_cl.D;
        Matrix s = blocks.stacked_S();
        Matrix l = blocks.stacked_L();
        Matrix h(1, nu1 + nu2);
        h << pin_row.matrix(), data2.matrix();
        design.normative_loop = Realization{s - design.g * l, design.g, h, plant.D};
    }

    // Embedded reduced controller (the block-2 subsystem).
    {
        const Matrix g2 = chosen->tail(nu2);
        design.controller_block =
            Realization{g2b.S - g2 * g2b.L, g2, ck_pi2, controller.D};
    }

    design.report = certify(design, opt.certify_tol, opt.horizon, opt.dt);

    try {
        design.extracted_controller =
            extract_controller(plant, design.reduced_loop, opt.cancel_tol);
        design.extraction_improper = !design.extracted_controller.proper();
        if (design.extraction_improper) {
            std::ostringstream os;
            os << "extracted controller is improper (deg num "
               << poly_degree(design.extracted_controller.num) << " > deg den "
               << poly_degree(design.extracted_controller.den)
               << "): kept as a transfer fraction";
            design.notes.push_back(os.str());
        }
    } catch (const CancellationUnsafe& e) {
        design.notes.push_back(std::string("controller extraction: ") + e.what());
    }

    return design;
}

/// Convenience overload: derive the interpolation blocks from the reference.
inline ClosedLoopDesign reduce_closed_loop(const Realization& plant,
                                           const Realization& controller,
                                           const SignalGenerator& reference, Index nu_c,
                                           const ReduceLoopOptions& opt = {}) {
    const BlockGenerator blocks = make_interpolation_blocks(reference, plant.order(), nu_c);
    return reduce_closed_loop(plant, controller, blocks, reference, opt);
}

} // namespace mmred
