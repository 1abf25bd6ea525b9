#pragma once

// Far-field expansion u = ½xᵀAx + bᵀx + (d/2) ln(xᵀ(I+A²)x) + c + remainder:
// coefficient extraction, the flux formula for d, harmonic exteriors and
// decay-rate regression.

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "lmc/fields.hpp"

namespace lmc {

struct Expansion {
    Sym2 A;
    std::array<double, 2> b{0.0, 0.0};
    double c = 0.0;
    double d = 0.0;
    double sigma = 0.0;  // claimed remainder exponent, |x|^{−σ}
    int mu = 0;          // claimed logarithmic power

    /// ½xᵀAx + bᵀx + (d/2) ln(xᵀ(I+A²)x) + c.
    [[nodiscard]] double model(double x, double y) const;
};

/// Remainder claims of the two theorems as functions of β. For β > 2 the
/// remainder is O(r^{−σ}(ln r)^μ) with σ = min{1, β−2}, μ = [β = 3]; for
/// 0 < β ≤ 2 it is O(r^{2−β}(ln r)^p) with p = [β] (β ≤ 1) or 2([β]−1).
struct RemainderClaim {
    double rate;   // exponent of r: −σ in the fast regime, 2 − β in the slow one
    int log_power;
    bool slow;
};
RemainderClaim claimed_remainder(double beta);

/// u − model over the whole grid.
ScalarField remainder_field(const ScalarField& u, const Expansion& e);

struct Window {
    double r_lo;
    double r_hi;
};

/// Outermost decade of the grid with the last three rows removed (the whole
/// interior when the grid spans less than a decade).
Window default_window(const PolarGrid& grid);

/// Area-weighted mean of the discrete Hessian over nodes with r in the window.
/// Throws WindowTooSmall when fewer than three radial rows fall inside.
Sym2 fit_A(const ScalarField& u, Window w);

/// Optional extra column r^{rate}(ln r)^{log_power} absorbing a known remainder.
struct RemainderTerm {
    double rate;
    int log_power;
};

struct BcdFit {
    std::array<double, 2> b{0.0, 0.0};
    double c = 0.0;
    double d = 0.0;
    double condition = 0.0;  // of the column-normalized normal equations
    double rms = 0.0;
    std::optional<double> remainder_coef;
};

/// Nearest point of 𝒜 = {phase(M) = θ} along the phase gradient (I + M²)⁻¹,
/// which commutes with M and is the direction the flux formula for d is
/// sensitive to. Throws PhaseOutOfRange unless θ ∈ (0, π), and DidNotConverge
/// when the scalar Newton iteration fails.
Sym2 project_admissible(const Sym2& a, double theta);

/// Least squares of u − ½xᵀAx on {x1, x2, 1, ½ln(xᵀ(I+A²)x)} over every node in
/// the window. Throws IllConditioned above condition 1e10 and WindowTooSmall
/// when the window holds fewer nodes than unknowns.
BcdFit fit_bcd(const ScalarField& u, const Sym2& A, Window w,
               std::optional<RemainderTerm> extra = std::nullopt);

/// Terms of the flux formula at radius r, Q = I + A²:
///   d = √det Q/(2π)·[∮ ν·Q⁻¹∇u ds − tr(Q⁻¹A)πr² + ∫_{|x|>r} Q⁻¹:(D²u − A) dx].
/// The exterior integral is a flux difference out to R*, the last circle with
/// two grid nodes outside it, and a power law fitted to the outer decade of
/// interior rows beyond R*. A density of mixed sign or one decaying slower
/// than ρ^{−2.05} is treated as zero there and reported with tail_closed unset.
struct FluxD {
    double d = 0.0;
    double boundary = 0.0;      // ∮ ν·Q⁻¹∇u ds
    double area = 0.0;          // tr(Q⁻¹A)·πr²
    double volume = 0.0;        // exterior integral over r < |x| < R*
    double tail = 0.0;          // beyond max(r, R*)
    double tail_rate = 0.0;     // fitted exponent of ρ² times the angular density
    bool tail_closed = false;   // false when the tail was negligible or not integrable
    double circle_only_d = 0.0; // the formula with the exterior integral dropped
};
FluxD flux_d(const ScalarField& u, const Sym2& A, double r);

/// flux_d(u, A, r).d. Throws RadiusOutOfRange unless r has two nodes on each side.
double d_from_flux(const ScalarField& u, const Sym2& A, double r);

struct ModeAmplitude {
    int k;
    double growing;   // amplitude of r^k
    double decaying;  // amplitude of r^{−k}
    bool growth_flag;
};

struct HarmonicFit {
    std::array<double, 2> b{0.0, 0.0};
    double d = 0.0;
    double c = 0.0;
    std::array<double, 2> mode1_decaying{0.0, 0.0};  // coefficients of cos φ/r, sin φ/r
    std::vector<ModeAmplitude> modes;                 // k = 2..k_max
    [[nodiscard]] bool any_growth() const;
};

/// Mode-by-mode solve from the angular Fourier coefficients on two circles.
/// Throws DegenerateRadii when r1 = r2 and NotHarmonic when r²|Δu| exceeds
/// 1e−6·max(1, sup|u|) on rows between the circles.
HarmonicFit harmonic_fit(const ScalarField& u, double r1, double r2, int k_max);

struct DecayFit {
    double slope = 0.0;
    double log_power = 0.0;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double fit_residual = 0.0;  // RMS in ln m
    [[nodiscard]] int detected_mu() const { return log_power > 0.5 ? 1 : 0; }
};

/// max_φ |w(r, φ)|.
double circle_sup(const ScalarField& w, double r);

/// Regression of ln m(r) on {1, ln r, ln ln r}, m = circle_sup(w, r). Needs at
/// least five radii, all > 1, spanning a decade (WindowTooSmall otherwise).
DecayFit estimate_decay(const ScalarField& w, const std::vector<double>& radii);

/// Same regression on given samples m(r) > 0.
DecayFit estimate_decay(std::span<const double> r, std::span<const double> m);

/// n radii log-spaced over [lo, hi].
std::vector<double> log_radii(double lo, double hi, int n);

}  // namespace lmc
