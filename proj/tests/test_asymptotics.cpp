#include <cmath>
#include <numbers>

#include "doctest.h"
#include "lmc/asymptotics.hpp"
#include "lmc/errors.hpp"

using namespace lmc;

namespace {

constexpr double kPi = std::numbers::pi;

// u₀ = a/2 r² + d ln r + (d/2) ln(1+a²) + c + r^{2−β}.
struct U0 {
    double theta = kPi / 2, beta = 2.5, d = 0.7, c = 0.0;
    [[nodiscard]] double a() const { return std::tan(theta / 2); }
    [[nodiscard]] double operator()(double r) const {
        return 0.5 * a() * r * r + d * std::log(r) + 0.5 * d * std::log(1 + a() * a()) + c + std::pow(r, 2 - beta);
    }
};

}  // namespace

TEST_CASE("fit_A: exact quadratic, linear terms and u0") {
    const PolarGrid g(2.5, 400.0, 129, 32);
    const Sym2 a{1.3, -0.4, 0.7};
    const auto q = ScalarField::sample(g, [&](double x, double y) { return 0.5 * a.quad(x, y); });
    CHECK(max_abs_diff(fit_A(q, {40, 400}), a) < 1e-9);
    const auto ql = ScalarField::sample(g, [&](double x, double y) { return 0.5 * a.quad(x, y) + 5 * x; });
    CHECK(max_abs_diff(fit_A(ql, default_window(g)), a) < 1e-9);

    const U0 u0;
    const auto u = ScalarField::sample_radial(g, u0);
    CHECK(max_abs_diff(fit_A(u, {200, 400}), Sym2::scalar(u0.a())) < 1e-3);
    CHECK_THROWS_AS(fit_A(u, {300, 301}), WindowTooSmall);
}

TEST_CASE("default_window: outermost decade without three boundary rows") {
    const PolarGrid g(2.5, 1000.0, 65, 16);
    const Window w = default_window(g);
    CHECK(w.r_hi == doctest::Approx(g.radius(g.n_r() - 4)));
    CHECK(w.r_lo == doctest::Approx(w.r_hi / 10));
}

TEST_CASE("project_admissible") {
    const Sym2 a{1.3, -0.4, 0.7};
    const double theta = phase(a);
    const Sym2 g = phase_gradient(a);
    const Sym2 p = project_admissible(a + g * 1e-3, theta);
    CHECK(std::abs(phase(p) - theta) < 1e-14);
    CHECK(max_abs_diff(p, a) < 1e-6);  // second order in the offset
    CHECK(max_abs_diff(project_admissible(Sym2::scalar(1 + 3e-8), kPi / 2), Sym2::scalar(1.0)) < 1e-15);
    // a perturbation tangent to 𝒜 is kept
    const Sym2 tangent{g.a22, 0.0, -g.a11};  // orthogonal to g in the Frobenius product
    const Sym2 q = project_admissible(a + tangent * 1e-4, theta);
    CHECK(max_abs_diff(q, a + tangent * 1e-4) < 1e-7);
    CHECK_THROWS_AS(project_admissible(a, 0.0), PhaseOutOfRange);
}

TEST_CASE("fit_bcd: model closure and u0") {
    const PolarGrid g(2.5, 1000.0, 129, 32);
    Expansion e{Sym2::scalar(1.0), {1.0, -2.0}, 3.0, 0.7};
    const auto u = ScalarField::sample(g, [&](double x, double y) { return e.model(x, y); });
    const BcdFit fit = fit_bcd(u, e.A, {100, 1000});
    CHECK(std::abs(fit.b[0] - 1.0) < 1e-8);
    CHECK(std::abs(fit.b[1] + 2.0) < 1e-8);
    CHECK(std::abs(fit.c - 3.0) < 1e-8);
    CHECK(std::abs(fit.d - 0.7) < 1e-8);

    // With the r^{2−β} remainder in the basis, u₀ is again in the span.
    const U0 u0;
    const auto f0 = ScalarField::sample_radial(g, u0);
    const BcdFit with = fit_bcd(f0, Sym2::scalar(u0.a()), {100, 1000}, RemainderTerm{2 - u0.beta, 0});
    CHECK(std::abs(with.d - 0.7) < 1e-6);
    CHECK(std::abs(*with.remainder_coef - 1.0) < 1e-6);
}

TEST_CASE("fit_bcd: a |x|^-1 remainder biases coefficients by O(1/r_lo)") {
    const PolarGrid g(2.5, 10000.0, 257, 32);
    const Sym2 a = Sym2::scalar(1.0);
    const auto u = ScalarField::sample(g, [&](double x, double y) {
        const double r = std::hypot(x, y);
        return 0.5 * a.quad(x, y) + 0.5 * std::log(2 * r * r) + 2.0 + x / (r * r) + 1.0 / r;
    });
    const double e1 = std::abs(fit_bcd(u, a, {50, 500}).d - 1.0);
    const double e2 = std::abs(fit_bcd(u, a, {500, 5000}).d - 1.0);
    CHECK(e1 > 0.0);
    CHECK(e1 / e2 == doctest::Approx(10.0).epsilon(0.3));
}

TEST_CASE("d_from_flux: exact fields") {
    const PolarGrid g(2.5, 1000.0, 257, 32);
    const double a = std::tan(kPi / 4);
    const auto u = ScalarField::sample_radial(g, [&](double r) { return 0.5 * a * r * r + 0.7 * std::log(r); });
    for (double r : {10.0, 30.0, 100.0}) CHECK(std::abs(d_from_flux(u, Sym2::scalar(a), r) - 0.7) < 1e-6);

    const PolarGrid gh(2.5, 200.0, 129, 32);
    const auto h = ScalarField::sample(gh, [&](double x, double y) { return 0.5 * a * (x * x + y * y) + 2 * x - y + 4; });
    CHECK(std::abs(d_from_flux(h, Sym2::scalar(a), 20.0)) < 1e-8);
    CHECK_THROWS_AS(d_from_flux(u, Sym2::scalar(a), 2.52), RadiusOutOfRange);
}

TEST_CASE("d_from_flux: anisotropic A through the normalized coordinates") {
    const PolarGrid g(2.5, 500.0, 193, 128);
    const double theta = 1.9;
    const double l1 = std::tan(0.5), l2 = std::tan(theta - 0.5);
    const double cs = std::cos(0.3), sn = std::sin(0.3);
    const Sym2 a{cs * cs * l1 + sn * sn * l2, cs * sn * (l1 - l2), sn * sn * l1 + cs * cs * l2};
    const Expansion e{a, {0.4, 0.1}, -1.0, 1.3};
    const auto u = ScalarField::sample(g, [&](double x, double y) { return e.model(x, y); });
    for (double r : {10.0, 50.0}) {
        const FluxD fd = flux_d(u, a, r);
        CHECK(std::abs(fd.d - 1.3) < 1e-6);
        CHECK(std::abs(fd.volume) < 1e-6);
    }
}

TEST_CASE("d_from_flux on u0 needs the exterior volume term") {
    const PolarGrid g(2.5, 1000.0, 257, 64);
    const U0 u0;
    const auto u = ScalarField::sample_radial(g, u0);
    for (double r : {10.0, 30.0, 100.0}) {
        const FluxD fd = flux_d(u, Sym2::scalar(u0.a()), r);
        CHECK(std::abs(fd.d - 0.7) < 1e-3);
        CHECK(fd.tail_closed);
        CHECK(fd.tail_rate == doctest::Approx(2 - u0.beta).epsilon(1e-3));
        // Dropping it leaves an error of |2−β| r^{2−β}.
        CHECK(std::abs(fd.circle_only_d - 0.7) == doctest::Approx(0.5 * std::pow(r, -0.5)).epsilon(1e-2));
    }
}

TEST_CASE("harmonic_fit") {
    const PolarGrid g(2.0, 200.0, 129, 32);
    auto make = [&](auto fn) { return ScalarField::sample(g, fn); };
    const auto u = make([](double x, double y) {
        const double r = std::hypot(x, y);
        return 3 + 2 * std::log(r) + x + x / (r * r);
    });
    for (auto [r1, r2] : {std::pair{5.0, 50.0}, std::pair{7.3, 120.0}}) {
        const HarmonicFit hf = harmonic_fit(u, r1, r2, 4);
        CHECK(std::abs(hf.b[0] - 1) < 1e-8);
        CHECK(std::abs(hf.b[1]) < 1e-8);
        CHECK(std::abs(hf.d - 2) < 1e-8);
        CHECK(std::abs(hf.c - 3) < 1e-8);
        CHECK(std::abs(hf.mode1_decaying[0] - 1) < 1e-8);
        CHECK_FALSE(hf.any_growth());
    }
    const HarmonicFit y = harmonic_fit(make([](double, double y) { return y; }), 5, 50, 3);
    CHECK(std::abs(y.b[1] - 1) < 1e-8);
    CHECK(std::abs(y.d) < 1e-8);
    CHECK(std::abs(y.c) < 1e-8);

    const auto grown = make([](double x, double y) { return 1 + x * x - y * y; });
    const HarmonicFit gf = harmonic_fit(grown, 5, 50, 3);
    CHECK(gf.modes.front().k == 2);
    CHECK(gf.modes.front().growth_flag);
    CHECK(gf.modes.front().growing == doctest::Approx(1.0));

    CHECK_THROWS_AS(harmonic_fit(u, 10, 10, 3), DegenerateRadii);
    CHECK_THROWS_AS(harmonic_fit(make([](double x, double y) { return x * x + y * y; }), 5, 50, 3), NotHarmonic);
}

TEST_CASE("estimate_decay") {
    const PolarGrid g(2.0, 20000.0, 257, 32);
    const auto w = ScalarField::sample_radial(g, [](double r) { return 1 / r; });
    const DecayFit f = estimate_decay(w, log_radii(10, 1000, 9));
    CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(f.log_power) < 1e-8);
    CHECK(f.fit_residual < 1e-10);
    CHECK(f.detected_mu() == 0);

    const auto wl = ScalarField::sample_radial(g, [](double r) { return std::log(r) / r; });
    const DecayFit fl = estimate_decay(wl, log_radii(100, 10000, 9));
    CHECK(std::abs(fl.slope + 1) < 0.02);
    CHECK(std::abs(fl.log_power - 1) < 0.1);
    CHECK(fl.detected_mu() == 1);

    const DecayFit scaled = estimate_decay(wl * 7.3, log_radii(100, 10000, 9));
    CHECK(std::abs(scaled.slope - fl.slope) < 1e-10);
    CHECK(std::abs(scaled.log_power - fl.log_power) < 1e-10);

    const U0 u0;
    const auto rem = remainder_field(ScalarField::sample_radial(g, u0),
                                     Expansion{Sym2::scalar(u0.a()), {0, 0}, u0.c, u0.d});
    CHECK(std::abs(estimate_decay(rem, log_radii(10, 1000, 9)).slope + 0.5) < 0.05);

    CHECK_THROWS_AS(estimate_decay(w, log_radii(10, 50, 9)), WindowTooSmall);
    CHECK_THROWS_AS(estimate_decay(w, log_radii(10, 1000, 4)), WindowTooSmall);
}

TEST_CASE("claimed remainder table") {
    CHECK(claimed_remainder(2.5).rate == doctest::Approx(-0.5));
    CHECK(claimed_remainder(3.0).log_power == 1);
    CHECK(claimed_remainder(4.0).rate == doctest::Approx(-1.0));
    CHECK(claimed_remainder(4.0).log_power == 0);
    CHECK(claimed_remainder(1.0).log_power == 1);
    CHECK(claimed_remainder(0.5).log_power == 0);
    CHECK(claimed_remainder(2.0).log_power == 2);
    CHECK(claimed_remainder(1.5).log_power == 0);
    CHECK(claimed_remainder(1.5).slow);
}
