#pragma once

#include <cmath>

#include "mmred/signal_generator.hpp"

namespace mmred {

// ---------------------------------------------------------------------------
// Exact-discretization simulation of generator-system cascades and loops.
// The augmented state advances by expm(Abar dt) each step; there is no
// integration error beyond the matrix exponential itself.
// ---------------------------------------------------------------------------

enum class ErrorConvention {
    y_minus_theta,  // open-loop cascade: eps = y - theta
    theta_minus_y,  // closed loop: eps = r - y
};

struct Trajectory {
    Vector times;
    Vector theta;
    Vector y;
    Vector eps;
    Index state_dim = 0;
    ErrorConvention convention = ErrorConvention::theta_minus_y;
};

struct TrackingVerdict {
    bool tracks = false;
    double tail_error = 0.0; // max |eps| over the final 10% of the horizon
    double decay_fit = 0.0;  // exponential rate fitted to |eps|
    double threshold = 0.0;
};

namespace detail {

inline Trajectory simulate_augmented(const Matrix& s, const Matrix& gen_l, const Vector& omega0,
                                     const Matrix& a, const Matrix& b, const Matrix& c, double d,
                                     const Vector& x0, double horizon, double dt,
                                     ErrorConvention conv) {
    if (!(dt > 0.0) || horizon < dt)
        throw ShapeError("simulate: need dt > 0 and horizon >= dt");
    const Index nw = s.rows();
    const Index nx = a.rows();
    Matrix abar = Matrix::Zero(nw + nx, nw + nx);
    abar.topLeftCorner(nw, nw) = s;
    abar.bottomLeftCorner(nx, nw) = b * gen_l;
    abar.bottomRightCorner(nx, nx) = a;
    const Matrix phi = expm(abar, dt);

    const Index steps = static_cast<Index>(std::llround(horizon / dt));
    Trajectory traj;
    traj.convention = conv;
    traj.state_dim = nx;
    traj.times.resize(steps + 1);
    traj.theta.resize(steps + 1);
    traj.y.resize(steps + 1);
    traj.eps.resize(steps + 1);

    Vector z(nw + nx);
    z << omega0, x0;
    for (Index k = 0; k <= steps; ++k) {
        traj.times(k) = static_cast<double>(k) * dt;
        const double th = (gen_l * z.head(nw))(0, 0);
        const double yv = (c * z.tail(nx))(0, 0) + d * th;
        traj.theta(k) = th;
        traj.y(k) = yv;
        traj.eps(k) = conv == ErrorConvention::y_minus_theta ? yv - th : th - yv;
        if (k < steps)
            z = phi * z;
    }
    return traj;
}

} // namespace detail

/// Cascade of Eq.-(9) type: the generator output feeds the system input;
/// eps = y - theta (the open-loop tracking-error convention).
inline Trajectory simulate_cascade(const Realization& sys, const SignalGenerator& g,
                                   const Vector& x0, double horizon, double dt) {
    sys.validate();
    g.validate();
    if (x0.size() != sys.order())
        throw ShapeError("simulate_cascade: x0 must match the system order");
    return detail::simulate_augmented(g.S, g.L, g.omega0, sys.A, sys.B, sys.C, sys.D, x0, horizon,
                                      dt, ErrorConvention::y_minus_theta);
}

/// Closed loop driven by r(t) = theta(t); eps = r - y.
inline Trajectory simulate_closed_loop(const Realization& p_cl, const SignalGenerator& g,
                                       double horizon, double dt) {
    p_cl.validate();
    g.validate();
    return detail::simulate_augmented(g.S, g.L, g.omega0, p_cl.A, p_cl.B, p_cl.C, p_cl.D,
                                      Vector::Zero(p_cl.order()), horizon, dt,
                                      ErrorConvention::theta_minus_y);
}

inline Trajectory simulate_closed_loop(const LoopSet& loop, const SignalGenerator& g,
                                       double horizon, double dt) {
    return simulate_closed_loop(loop.p_cl, g, horizon, dt);
}

/// Horizon covering 50 time constants of the slowest stable mode, capped.
inline double auto_horizon(const Matrix& a, double cap = 500.0) {
    const double abscissa = spectral_abscissa(a);
    if (abscissa >= 0.0)
        return cap;
    return std::min(cap, 50.0 / std::abs(abscissa));
}

/// Threshold the trajectory tail (final 10% of the horizon). The default
/// threshold is 1e-4 * ||theta||_inf. decay_fit is the least-squares
/// exponential rate of |eps| over the decaying segment.
inline TrackingVerdict verdict(const Trajectory& traj, double threshold = -1.0) {
    TrackingVerdict v;
    const Index n = traj.eps.size();
    const Index tail_start = n - std::max<Index>(1, n / 10);
    v.tail_error = traj.eps.tail(n - tail_start).cwiseAbs().maxCoeff();
    const double theta_scale = traj.theta.cwiseAbs().maxCoeff();
    v.threshold = threshold >= 0.0 ? threshold : 1e-4 * std::max(theta_scale, 1e-30);
    v.tracks = v.tail_error < v.threshold;

    // Exponential fit over the second half of the horizon, samples above the
    // double-precision floor.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    Index count = 0;
    for (Index k = n / 2; k < n; ++k) {
        const double e = std::abs(traj.eps(k));
        if (e > 1e-280) {
            const double lx = traj.times(k);
            const double ly = std::log(e);
            sx += lx;
            sy += ly;
            sxx += lx * lx;
            sxy += lx * ly;
            ++count;
        }
    }
    if (count >= 2 && (count * sxx - sx * sx) > 0.0)
        v.decay_fit = -(static_cast<double>(count) * sxy - sx * sy) /
                      (static_cast<double>(count) * sxx - sx * sx);
    return v;
}

} // namespace mmred
