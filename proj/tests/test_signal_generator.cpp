#include <catch2/catch_amalgamated.hpp>

#include "mmred/signal_generator.hpp"

using namespace mmred;
using Catch::Approx;

namespace {
Vector linspace(double a, double b, Index n) {
    Vector t(n);
    for (Index i = 0; i < n; ++i)
        t(i) = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return t;
}
} // namespace

TEST_CASE("polynomial generators produce t^k exactly") {
    const Vector t = linspace(0.0, 10.0, 41);
    for (Index k = 0; k <= 4; ++k) {
        const SignalGenerator g = make_polynomial(k);
        const Vector theta = trajectory(g, t);
        for (Index i = 0; i < t.size(); ++i) {
            const double want = std::pow(t(i), static_cast<double>(k));
            REQUIRE(theta(i) == Approx(want).epsilon(1e-10).margin(1e-10));
        }
    }
}

TEST_CASE("t^2 initial condition matches the nilpotent-exponential convention") {
    const SignalGenerator g = make_polynomial(2);
    REQUIRE(g.omega0(0) == 0.0);
    REQUIRE(g.omega0(1) == 0.0);
    REQUIRE(g.omega0(2) == 2.0);
}

TEST_CASE("step and ramp spot values") {
    Vector t5(1);
    t5 << 5.0;
    REQUIRE(trajectory(make_step(), t5)(0) == Approx(1.0));
    Vector t3(1);
    t3 << 3.0;
    REQUIRE(trajectory(make_ramp(), t3)(0) == Approx(3.0));
}

TEST_CASE("sinusoid: spectrum, trajectory, zero crossing") {
    const SignalGenerator g = make_sinusoid(2.0);
    const ComplexVector e = eigenvalues(g.S);
    REQUIRE(e.cwiseAbs().maxCoeff() == Approx(2.0));
    REQUIRE(e.real().cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-14));
    Vector t(1);
    t << std::numbers::pi / 4.0; // cos(pi/2) = 0
    REQUIRE(trajectory(g, t)(0) == Approx(0.0).margin(1e-12));
}

TEST_CASE("every constructor yields an observable pair") {
    REQUIRE(is_observable(make_step().L, make_step().S));
    REQUIRE(is_observable(make_polynomial(3).L, make_polynomial(3).S));
    REQUIRE(is_observable(make_sinusoid(1.0).L, make_sinusoid(1.0).S));
    REQUIRE(is_observable(make_jordan(-10.0, 1).L, make_jordan(-10.0, 1).S));
    const SignalGenerator cj = make_jordan(Complex(-0.5, 1.5), 3);
    REQUIRE(cj.dim() == 6);
    REQUIRE(is_observable(cj.L, cj.S));
}

TEST_CASE("compose: step with sinusoid is observable with the right spectrum") {
    const BlockGenerator bg = compose(make_step(), make_sinusoid(1.0));
    REQUIRE(bg.combined_observable());
    const SignalGenerator g = bg.combined();
    const ComplexVector e = eigenvalues(g.S);
    REQUIRE(e.size() == 3);
    std::vector<double> im{e(0).imag(), e(1).imag(), e(2).imag()};
    std::sort(im.begin(), im.end());
    REQUIRE(im[0] == Approx(-1.0));
    REQUIRE(im[1] == Approx(0.0).margin(1e-12));
    REQUIRE(im[2] == Approx(1.0));
}

TEST_CASE("two Jordan blocks at the same eigenvalue are flagged unobservable") {
    REQUIRE_THROWS_AS(compose(make_jordan(0.0, 8), make_jordan(0.0, 4)), NotObservable);
}

TEST_CASE("block trajectories add when S3 = 0") {
    const SignalGenerator g1 = make_step();
    const SignalGenerator g2 = make_sinusoid(1.3);
    const SignalGenerator both = compose(g1, g2).combined();
    const Vector t = linspace(0.0, 8.0, 17);
    const Vector sum = trajectory(g1, t) + trajectory(g2, t);
    const Vector combined = trajectory(both, t);
    REQUIRE((sum - combined).cwiseAbs().maxCoeff() == Approx(0.0).margin(1e-12));
}

TEST_CASE("persistence predicate") {
    REQUIRE(is_persistent(make_step()));
    REQUIRE(is_persistent(make_ramp()));
    REQUIRE(is_persistent(make_sinusoid(2.0)));
    REQUIRE_FALSE(is_persistent(make_jordan(-10.0, 1))); // decaying mode
    SignalGenerator dead = make_ramp();
    dead.omega0 << 1.0, 0.0; // constant output: omega0 not cyclic
    REQUIRE_FALSE(is_persistent(dead));
}

TEST_CASE("trajectory validates its time grid") {
    Vector bad(2);
    bad << 1.0, 0.5;
    REQUIRE_THROWS_AS(trajectory(make_step(), bad), ShapeError);
}
