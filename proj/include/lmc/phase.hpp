#pragma once

// Pointwise algebra of the two-dimensional phase operator
//
//     F(M) = arctan λ1(M) + arctan λ2(M)
//
// on symmetric 2x2 matrices, its derivative, and the Lewy rotation acting on
// Hessians. Everything here is a pure value-level function.

#include <cmath>
#include <utility>

namespace lmc {

/// Symmetric 2x2 matrix {{a11, a12}, {a12, a22}}.
struct Sym2 {
    double a11 = 0.0;
    double a12 = 0.0;
    double a22 = 0.0;

    static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }
    static constexpr Sym2 scalar(double a) { return {a, 0.0, a}; }
    static constexpr Sym2 diag(double d1, double d2) { return {d1, 0.0, d2}; }

    [[nodiscard]] constexpr double trace() const { return a11 + a22; }
    [[nodiscard]] constexpr double det() const { return a11 * a22 - a12 * a12; }
    [[nodiscard]] double frobenius() const {
        return std::sqrt(a11 * a11 + 2.0 * a12 * a12 + a22 * a22);
    }

    constexpr Sym2& operator+=(const Sym2& o) {
        a11 += o.a11; a12 += o.a12; a22 += o.a22;
        return *this;
    }
    constexpr Sym2& operator-=(const Sym2& o) {
        a11 -= o.a11; a12 -= o.a12; a22 -= o.a22;
        return *this;
    }
    constexpr Sym2& operator*=(double k) {
        a11 *= k; a12 *= k; a22 *= k;
        return *this;
    }

    friend constexpr Sym2 operator+(Sym2 a, const Sym2& b) { return a += b; }
    friend constexpr Sym2 operator-(Sym2 a, const Sym2& b) { return a -= b; }
    friend constexpr Sym2 operator*(Sym2 a, double k) { return a *= k; }
    friend constexpr Sym2 operator*(double k, Sym2 a) { return a *= k; }
    friend constexpr bool operator==(const Sym2&, const Sym2&) = default;

    /// Quadratic form xᵀ M x.
    [[nodiscard]] constexpr double quad(double x, double y) const {
        return a11 * x * x + 2.0 * a12 * x * y + a22 * y * y;
    }
    /// Matrix-vector product.
    [[nodiscard]] constexpr std::pair<double, double> apply(double x, double y) const {
        return {a11 * x + a12 * y, a12 * x + a22 * y};
    }
};

/// Largest absolute entry difference.
double max_abs_diff(const Sym2& a, const Sym2& b);

/// Inverse of a symmetric matrix. Throws InvalidArgument when det == 0.
Sym2 inverse(const Sym2& m);

/// Square of a symmetric matrix (again symmetric).
Sym2 square(const Sym2& m);

/// Principal square root of a symmetric positive definite matrix.
Sym2 sqrt_spd(const Sym2& m);

/// Eigenvalues ordered λ1 ≤ λ2.
std::pair<double, double> eigenvalues(const Sym2& m);

/// arctan λ1 + arctan λ2, in (−π, π).
double phase(const Sym2& m);

/// Derivative of phase at M, the matrix G = (I + M²)⁻¹, so that
/// dF = tr(G dM) = G11 dM11 + 2 G12 dM12 + G22 dM22.
Sym2 phase_gradient(const Sym2& m);

/// Angles of a Lewy rotation. vartheta is always delta / 2.
class PhaseParams {
public:
    /// Requires 0 < theta < π and 0 < delta < theta; throws InvalidArgument.
    PhaseParams(double theta, double delta);

    [[nodiscard]] double theta() const { return theta_; }
    [[nodiscard]] double delta() const { return delta_; }
    [[nodiscard]] double vartheta() const { return vartheta_; }
    [[nodiscard]] double cos_vartheta() const { return std::cos(vartheta_); }
    [[nodiscard]] double sin_vartheta() const { return std::sin(vartheta_); }
    /// Phase of the rotated equation, θ − δ.
    [[nodiscard]] double rotated_theta() const { return theta_ - delta_; }
    /// Upper bound on the rotated Hessian, cot ϑ.
    [[nodiscard]] double hessian_bound() const { return 1.0 / std::tan(vartheta_); }

private:
    double theta_;
    double delta_;
    double vartheta_;
};

/// Rotated Hessian (−sI + cM)(cI + sM)⁻¹, symmetrized.
/// Throws SingularRotation when |det(cI + sM)| < 1e−12·(1 + ‖M‖²).
Sym2 lewy_hessian(const Sym2& m, const PhaseParams& p);

/// Inverse rotation (sI + cM̃)(cI − sM̃)⁻¹, symmetrized.
/// Throws SingularRotation when an eigenvalue of M̃ reaches cot ϑ.
Sym2 lewy_hessian_inverse(const Sym2& mt, const PhaseParams& p);

}  // namespace lmc
