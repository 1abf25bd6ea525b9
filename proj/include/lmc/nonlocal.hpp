#pragma once

// Fractional Laplacian and Riesz potential on ℝ² by quadrature, with checks of
// the product rule, the cross-term integral and the commutation with ∂_k.
//
//   (−Δ)ˢu(x)  = c_{2,s}  P.V.∫ (u(x) − u(y)) / |x−y|^{2+2s} dy
//   (−Δ)^{−s}f(x) = c_{2,−s} ∫ f(y) / |x−y|^{2−2s} dy
//
// Every integral is split with a smooth cutoff χ(|y−x|/ρ0), ρ0 = max(1, |x|/2):
// the part near x is integrated in polar coordinates centred at x on
// log-spaced Gauss-Legendre panels, the rest in polar coordinates centred at
// the origin out to quad_r_max, and the region beyond is closed with the
// function's power-law tail model.

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "lmc/asymptotics.hpp"
#include "lmc/fields.hpp"

namespace lmc {

struct FracParams {
    double s;
    double c_ns;        // c_{2,s}
    double c_riesz;     // c_{2,−s}
    double quad_r_max;
    double quad_tol;
};

/// c_{2,s} = s 4^s Γ(1+s) / (π Γ(1−s)) and c_{2,−s} = Γ(1−s) / (4^s π Γ(s)).
/// Throws InvalidArgument unless 0 < s < 1 and quad_r_max, quad_tol > 0.
FracParams make_frac_params(double s, double quad_r_max = 1e4, double quad_tol = 1e-8);

/// u(y) ≈ amplitude·|y|^{−exponent} for |y| ≥ quad_r_max.
struct TailModel {
    double amplitude = 0.0;
    double exponent = 0.0;
};

struct TestFunction {
    std::function<double(double, double)> value;
    std::function<std::array<double, 2>(double, double)> gradient;  // may be empty
    std::optional<TailModel> tail;

    [[nodiscard]] double operator()(double x, double y) const { return value(x, y); }
};

/// Pointwise product, with gradient by the product rule and tail amplitudes
/// and exponents combined.
TestFunction product(const TestFunction& a, const TestFunction& b);

/// amp·e^{−|x−c|²/w²}; tail {0, 0}.
TestFunction gaussian_bump(double amp = 1.0, Point centre = {}, double width = 1.0);
/// (1 + |x|²)^{−σ/2}; tail {1, σ}.
TestFunction algebraic_decay(double sigma);
/// exp(1 − 1/(1 − |x−c|²/ρ²)) inside B_ρ(c), zero outside; tail {0, 0}.
TestFunction compact_bump(Point centre, double radius);
/// Constant function; tail {value, 0}.
TestFunction constant_function(double value);

/// (−Δ)ˢ(amp e^{−|x|²}) in closed form, amp·4^s Γ(1+s) ₁F₁(1+s; 1; −|x|²).
double gaussian_frac_laplacian(double s, Point x, double amp = 1.0);

/// Throws TailModelMissing when u has no tail model and its values on
/// |y| = quad_r_max would contribute more than quad_tol.
double frac_laplacian(const TestFunction& u, Point x, const FracParams& p);

/// f must vanish outside quad_r_max.
double riesz_potential(const TestFunction& f, Point x, const FracParams& p);

/// ∫ (u1(x) − u1(y))(u2(x) − u2(y)) / |x−y|^{2+2s} dy, without c_{2,s}.
double cross_term(const TestFunction& u1, const TestFunction& u2, Point x, const FracParams& p);

/// (−Δ)ˢ(u1u2) − u1(−Δ)ˢu2 − u2(−Δ)ˢu1 + c_{2,s}·cross_term at x.
struct ProductRuleDefect {
    double defect;
    double scale;  // largest magnitude among the four terms
};
ProductRuleDefect product_rule_defect(const TestFunction& u1, const TestFunction& u2, Point x,
                                      const FracParams& p);

/// (−Δ)ˢ(∂_k u)(x) minus the fourth-order central difference of (−Δ)ˢu along
/// axis k (0 or 1) with step h. Needs u.gradient.
struct CommutatorDefect {
    double defect;
    double lhs;
    double rhs;
};
CommutatorDefect commutator_defect(const TestFunction& u, int k, Point x, const FracParams& p,
                                   double h = 0.05);

/// (−Δ)^{−s}f for a radial f, tabulated in ln(1 + r) on [0, quad_r_max] and
/// splined; tail c_{2,−s}·mass·r^{2s−2} with mass = ∫ f.
TestFunction riesz_profile(const TestFunction& radial_f, const FracParams& p, int n_table = 400);

/// Values along the ray x = r(cos α, sin α) with a running slope
/// d ln|value| / d ln r from neighbouring samples.
struct SweepRow {
    double r;
    double value;
    double running_slope;
};
std::vector<SweepRow> radius_sweep(const std::function<double(Point)>& fn, const std::vector<double>& radii,
                                   double angle = 0.0);

/// estimate_decay on |value| of a sweep.
DecayFit sweep_decay(const std::vector<SweepRow>& rows);

/// CSV with header "r,value,running_slope".
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);

}  // namespace lmc
