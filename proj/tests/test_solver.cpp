#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lmc/errors.hpp"
#include "lmc/solver.hpp"

using namespace lmc;

namespace {

constexpr double kPi = std::numbers::pi;

// Manufactured radial solution a/2 r² + d ln r + r^{2−β} and its exact right-hand side,
// from the radial Hessian eigenvalue pair (v″, v′/r).
struct Manufactured {
    double theta, beta, d;
    [[nodiscard]] double a() const { return std::tan(theta / 2); }
    [[nodiscard]] double u(double r) const { return 0.5 * a() * r * r + d * std::log(r) + std::pow(r, 2 - beta); }
    [[nodiscard]] double du(double r) const { return a() * r + d / r + (2 - beta) * std::pow(r, 1 - beta); }
    [[nodiscard]] double ddu(double r) const { return a() - d / (r * r) + (2 - beta) * (1 - beta) * std::pow(r, -beta); }
    [[nodiscard]] double f(double r) const { return std::atan(ddu(r)) + std::atan(du(r) / r) - theta; }
};

ExteriorProblem manufactured_problem(const Manufactured& m, const PolarGrid& g) {
    auto f = ScalarField::sample_radial(g, [&](double r) { return m.f(r); });
    return make_problem(g, m.theta, std::move(f), [&](double x, double y) { return m.u(std::hypot(x, y)); }, m.beta);
}

double max_error(const ScalarField& u, const Manufactured& m) {
    const auto exact = ScalarField::sample_radial(u.grid(), [&](double r) { return m.u(r); });
    return (u - exact).sup_norm();
}

}  // namespace

TEST_CASE("residual: exact quadratic, zero field and shape checks") {
    const PolarGrid g(2.5, 20.0, 24, 32);
    const double theta = 1.1;
    const double a = std::tan(theta / 2);
    const auto q = ScalarField::sample(g, [&](double x, double y) { return 0.5 * a * (x * x + y * y); });
    const ExteriorProblem p = make_problem(g, theta, ScalarField(g), [&](double x, double y) { return 0.5 * a * (x * x + y * y); }, 3.0);
    CHECK(residual(q, p).sup_norm() < 1e-9);

    const ExteriorProblem p2 = make_problem(g, kPi / 2, ScalarField(g), [](double, double) { return 0.0; }, 3.0);
    const ScalarField r0 = residual(ScalarField(g), p2);
    for (int i = 1; i + 1 < g.n_r(); ++i) {
        for (int j = 0; j < g.n_phi(); ++j) CHECK(r0.at(i, j) == doctest::Approx(-kPi / 2));
    }
    for (int j = 0; j < g.n_phi(); ++j) {
        CHECK(r0.at(0, j) == 0.0);
        CHECK(r0.at(g.n_r() - 1, j) == 0.0);
    }
    const PolarGrid other(2.5, 20.0, 26, 32);
    CHECK_THROWS_AS(residual(ScalarField(other), p2), ShapeMismatch);
}

TEST_CASE("residual of the manufactured solution is small and shrinks with h") {
    const Manufactured m{kPi / 2, 2.5, 0.7};
    double prev = 0.0;
    for (int k = 0; k < 2; ++k) {
        const PolarGrid g(2.5, 20.0, 32 << k, 32);
        const ExteriorProblem p = manufactured_problem(m, g);
        const auto u = ScalarField::sample_radial(g, [&](double r) { return m.u(r); });
        const double res = residual(u, p).sup_norm();
        CHECK(res < 1e-4);
        if (k) CHECK(prev / res > 3.5);
        prev = res;
    }
}

TEST_CASE("ExteriorProblem rejects degenerate phases") {
    const PolarGrid g(2.5, 20.0, 16, 16);
    auto f = ScalarField::sample_radial(g, [](double) { return 2.0; });
    CHECK_THROWS_AS(make_problem(g, 1.5, f, [](double, double) { return 0.0; }, 2.0), PhaseOutOfRange);
}

TEST_CASE("newton_solve: exact quadratic is a fixed point") {
    const PolarGrid g(2.5, 20.0, 32, 32);
    const double theta = 2.0;
    const double a = std::tan(theta / 2);
    auto quad = [&](double x, double y) { return 0.5 * a * (x * x + y * y); };
    const ExteriorProblem p = make_problem(g, theta, ScalarField(g), quad, 3.0);
    const NewtonResult res = newton_solve(p, ScalarField::sample(g, quad));
    CHECK(res.report.converged);
    CHECK(res.report.iterations <= 1);
    CHECK(res.report.residual_history.back() < 1e-10);
}

TEST_CASE("newton_solve: f = 0 with quadratic boundary data recovers the quadratic") {
    const PolarGrid g(2.5, 20.0, 32, 32);
    const double theta = 1.2;
    const Sym2 a = [&] {
        // Anisotropic admissible matrix: arctan λ1 + arctan λ2 = θ.
        const double l1 = std::tan(0.2), l2 = std::tan(theta - 0.2);
        const double c = std::cos(0.4), s = std::sin(0.4);
        return Sym2{c * c * l1 + s * s * l2, c * s * (l1 - l2), s * s * l1 + c * c * l2};
    }();
    auto quad = [&](double x, double y) { return 0.5 * a.quad(x, y) + 0.3 * x - y; };
    const ExteriorProblem p = make_problem(g, theta, ScalarField(g), quad, 3.0);
    const NewtonResult res = newton_solve(p, default_initial_guess(p));
    require_converged(res);
    const auto exact = ScalarField::sample(g, quad);
    CHECK((res.u - exact).sup_norm() < 1e-8);
}

TEST_CASE("newton_solve: manufactured solution converges and the tail is quadratic") {
    const Manufactured m{kPi / 2, 2.5, 0.7};
    double err[2];
    for (int k = 0; k < 2; ++k) {
        const PolarGrid g(2.5, 20.0, 32 << k, 32 << k);
        const ExteriorProblem p = manufactured_problem(m, g);
        const NewtonResult res = newton_solve(p, default_initial_guess(p));
        require_converged(res);
        CHECK(res.report.iterations <= 15);
        err[k] = max_error(res.u, m);
        const auto& h = res.report.residual_history;
        for (std::size_t it = 1; it < h.size(); ++it) {
            if (h[it - 1] < 1e-3 && h[it] > 1e-12) CHECK(h[it] / (h[it - 1] * h[it - 1]) <= 10.0);
        }
    }
    CHECK(std::log2(err[0] / err[1]) >= 1.8);
}

TEST_CASE("newton_solve: perturbed start reaches the same discrete solution") {
    const Manufactured m{kPi / 2, 2.5, 0.7};
    const PolarGrid g(2.5, 20.0, 32, 32);
    const ExteriorProblem p = manufactured_problem(m, g);
    const auto oracle = ScalarField::sample_radial(g, [&](double r) { return m.u(r); });
    const auto bump = ScalarField::sample(g, [](double x, double y) {
        const double dx = x - 6.0, dy = y - 2.0;
        return std::exp(-(dx * dx + dy * dy) / 4.0);
    });
    const NewtonResult a = newton_solve(p, oracle);
    const NewtonResult b = newton_solve(p, oracle + bump * 0.1);
    require_converged(a);
    require_converged(b);
    CHECK((a.u - b.u).sup_norm() < 1e-8);
}

TEST_CASE("newton_solve: iteration cap reports non-convergence") {
    const Manufactured m{kPi / 2, 2.5, 0.7};
    const PolarGrid g(2.5, 20.0, 24, 32);
    const ExteriorProblem p = manufactured_problem(m, g);
    NewtonOptions opts;
    opts.max_iterations = 1;
    const NewtonResult res = newton_solve(p, default_initial_guess(p), opts);
    CHECK_FALSE(res.report.converged);
    CHECK(res.report.iterations == 1);
    CHECK_THROWS_AS(require_converged(res), DidNotConverge);
}

TEST_CASE("harmonic_extension reproduces harmonic data") {
    const PolarGrid g(2.0, 30.0, 24, 32);
    auto h = [](double x, double y) {
        const double r2 = x * x + y * y;
        return 1.0 + 0.5 * std::log(r2) + 2 * x - y / r2 + (x * x - y * y) / 100.0;
    };
    std::vector<double> in, out;
    for (int j = 0; j < g.n_phi(); ++j) {
        const Point a = g.node(0, j), b = g.node(g.n_r() - 1, j);
        in.push_back(h(a.x, a.y));
        out.push_back(h(b.x, b.y));
    }
    const ScalarField e = harmonic_extension(g, in, out);
    CHECK((e - ScalarField::sample(g, h)).sup_norm() < 1e-10);
}

TEST_CASE("radial_solve: invariant ray, slow-decay rates and energy identity") {
    const double theta = kPi / 2;
    const double a = std::tan(theta / 2);
    std::vector<double> radii;
    for (int k = 0; k <= 60; ++k) radii.push_back(3.0 * std::pow(10.0, k / 15.0));

    SUBCASE("f = 0 keeps u' = tan(θ/2) r") {
        const auto prof = radial_solve(theta, [](double) { return 0.0; }, 3.0, a * 3.0, 4.5 * a, radii);
        REQUIRE(prof.r.size() == radii.size());
        CHECK(prof.u.front() == doctest::Approx(4.5 * a));
        for (std::size_t k = 0; k < prof.r.size(); ++k) {
            CHECK(std::abs(prof.du[k] / (a * prof.r[k]) - 1.0) < 1e-9);
        }
    }
    SUBCASE("f = r^-2: remainder / (ln r)^2 stays in a fixed positive interval") {
        const double r0 = 3.0;
        const double slope0 = a * r0 + (1 + a * a) * std::log(r0) / r0;
        const auto prof = radial_solve(theta, [](double r) { return 1.0 / (r * r); }, r0, slope0,
                                       0.5 * a * r0 * r0 + 0.5 * (1 + a * a) * std::pow(std::log(r0), 2), radii);
        double lo = 1e300, hi = 0.0;
        for (std::size_t k = 0; k < prof.r.size(); ++k) {
            if (prof.r[k] < 100.0) continue;
            const double q = prof.remainder[k] / std::pow(std::log(prof.r[k]), 2);
            lo = std::min(lo, q);
            hi = std::max(hi, q);
        }
        CHECK(lo > 0.0);
        CHECK(hi / lo < 1.5);
    }
    SUBCASE("energy identity along the trajectory") {
        auto f = [](double r) { return std::pow(r, -1.5); };
        const auto prof = radial_solve(theta, f, 3.0, a * 3.0, 0.0, radii);
        for (std::size_t k = 1; k + 1 < prof.r.size(); ++k) {
            // u'' from the ODE right-hand side evaluated on the sampled state.
            const double upp = std::tan(theta + f(prof.r[k]) - std::atan(prof.du[k] / prof.r[k]));
            const double ph = std::atan(upp) + std::atan(prof.du[k] / prof.r[k]);
            CHECK(std::abs(ph - theta - f(prof.r[k])) < 1e-12);
            // and against a centred difference of u' on the output profile
            const double fd = (prof.du[k + 1] - prof.du[k - 1]) / (prof.r[k + 1] - prof.r[k - 1]);
            CHECK(std::abs(fd - upp) < 0.05 * std::abs(upp));
        }
    }
    SUBCASE("leaving the admissible phase window throws") {
        CHECK_THROWS_AS(radial_solve(theta, [](double r) { return r > 10 ? 2.0 : 0.0; }, 3.0, 3.0 * a, 0.0, radii),
                        PhaseOutOfRange);
    }
}
