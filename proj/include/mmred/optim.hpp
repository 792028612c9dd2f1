#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "mmred/linalg.hpp"

namespace mmred {

struct NelderMeadOptions {
    long max_evals = 4000;
    double init_step = 1.0;
    double xtol = 1e-10;
    double ftol = 1e-12;
    // Optional early-exit level: stop as soon as f < target.
    double target = -std::numeric_limits<double>::infinity();
};

struct NelderMeadResult {
    Vector x;
    double f;
    long evals;
};

/// Standard Nelder-Mead downhill simplex (reflection 1, expansion 2,
/// contraction 0.5, shrink 0.5). Deterministic for a fixed start.
inline NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& fn,
                                    const Vector& x0, const NelderMeadOptions& opt = {}) {
    const Index n = x0.size();
    long evals = 0;
    auto eval = [&](const Vector& x) {
        ++evals;
        return fn(x);
    };

    std::vector<Vector> xs(n + 1);
    std::vector<double> fs(n + 1);
    xs[0] = x0;
    fs[0] = eval(x0);
    for (Index i = 0; i < n; ++i) {
        Vector x = x0;
        x(i) += opt.init_step * (x0(i) != 0.0 ? 0.1 * std::abs(x0(i)) + 1.0 : 1.0);
        xs[i + 1] = x;
        fs[i + 1] = eval(x);
    }

    std::vector<int> order(n + 1);
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return fs[a] < fs[b]; });
        std::vector<Vector> xs2(n + 1);
        std::vector<double> fs2(n + 1);
        for (Index i = 0; i <= n; ++i) {
            xs2[i] = xs[order[i]];
            fs2[i] = fs[order[i]];
        }
        xs.swap(xs2);
        fs.swap(fs2);
    };
    sort_simplex();

    while (evals < opt.max_evals) {
        if (fs[0] < opt.target)
            break;
        // convergence: simplex diameter and f-spread
        double diam = 0.0;
        for (Index i = 1; i <= n; ++i)
            diam = std::max(diam, (xs[i] - xs[0]).norm());
        if (diam < opt.xtol && std::abs(fs[n] - fs[0]) < opt.ftol)
            break;

        Vector centroid = Vector::Zero(n);
        for (Index i = 0; i < n; ++i)
            centroid += xs[i];
        centroid /= static_cast<double>(n);

        const Vector xr = centroid + (centroid - xs[n]);
        const double fr = eval(xr);
        if (fr < fs[0]) {
            const Vector xe = centroid + 2.0 * (centroid - xs[n]);
            const double fe = eval(xe);
            if (fe < fr) {
                xs[n] = xe;
                fs[n] = fe;
            } else {
                xs[n] = xr;
                fs[n] = fr;
            }
        } else if (fr < fs[n - 1]) {
            xs[n] = xr;
            fs[n] = fr;
        } else {
            const bool outside = fr < fs[n];
            const Vector step = 0.5 * (centroid - xs[n]);
            const Vector xc = outside ? Vector(centroid + step) : Vector(centroid - step);
            const double fc = eval(xc);
            if (fc < (outside ? fr : fs[n])) {
                xs[n] = xc;
                fs[n] = fc;
            } else {
                for (Index i = 1; i <= n; ++i) {
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0]);
                    fs[i] = eval(xs[i]);
                }
            }
        }
        sort_simplex();
    }

    return {xs[0], fs[0], evals};
}

} // namespace mmred
