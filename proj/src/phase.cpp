#include "lmc/phase.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmc/errors.hpp"

namespace lmc {

namespace {

// General 2x2 matrix used for intermediate non-symmetric products.
struct Mat2 {
    double m11, m12, m21, m22;
};

Mat2 to_mat(const Sym2& s) { return {s.a11, s.a12, s.a12, s.a22}; }

Mat2 mul(const Mat2& a, const Mat2& b) {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
}

Sym2 symmetrize(const Mat2& a) { return {a.m11, 0.5 * (a.m12 + a.m21), a.m22}; }

// (alpha I + beta M)(gamma I + eta M)⁻¹ with the scale-aware singularity test.
Sym2 mobius(const Sym2& m, double alpha, double beta, double gamma, double eta) {
    const Sym2 den = Sym2::scalar(gamma) + eta * m;
    const double det = den.det();
    const double scale = 1.0 + m.frobenius() * m.frobenius();
    if (std::abs(det) < 1e-12 * scale) {
        throw SingularRotation("rotation denominator is singular (det = " +
                               std::to_string(det) + ")");
    }
    const Sym2 num = Sym2::scalar(alpha) + beta * m;
    const Sym2 den_inv{den.a22 / det, -den.a12 / det, den.a11 / det};
    return symmetrize(mul(to_mat(num), to_mat(den_inv)));
}

}  // namespace

double max_abs_diff(const Sym2& a, const Sym2& b) {
    return std::max({std::abs(a.a11 - b.a11), std::abs(a.a12 - b.a12),
                     std::abs(a.a22 - b.a22)});
}

Sym2 inverse(const Sym2& m) {
    const double det = m.det();
    if (det == 0.0) throw InvalidArgument("inverse of a singular matrix");
    return {m.a22 / det, -m.a12 / det, m.a11 / det};
}

Sym2 square(const Sym2& m) {
    return {m.a11 * m.a11 + m.a12 * m.a12, m.a12 * (m.a11 + m.a22),
            m.a22 * m.a22 + m.a12 * m.a12};
}

Sym2 sqrt_spd(const Sym2& m) {
    // For 2x2 SPD matrices: √M = (M + √det I) / √(tr M + 2√det).
    const double sd = std::sqrt(m.det());
    if (!(sd > 0.0)) throw InvalidArgument("sqrt_spd: matrix is not positive definite");
    const double t = std::sqrt(m.trace() + 2.0 * sd);
    return {(m.a11 + sd) / t, m.a12 / t, (m.a22 + sd) / t};
}

std::pair<double, double> eigenvalues(const Sym2& m) {
    const double mean = 0.5 * (m.a11 + m.a22);
    const double rad = std::hypot(0.5 * (m.a11 - m.a22), m.a12);
    const double det = m.det();
    double lo = mean - rad;
    double hi = mean + rad;
    // Recover the smaller-magnitude root from the determinant to avoid cancellation.
    if (mean >= 0.0 && hi != 0.0) {
        lo = det / hi;
    } else if (mean < 0.0 && lo != 0.0) {
        hi = det / lo;
    }
    if (lo > hi) std::swap(lo, hi);
    return {lo, hi};
}

double phase(const Sym2& m) {
    const auto [l1, l2] = eigenvalues(m);
    return std::atan(l1) + std::atan(l2);
}

Sym2 phase_gradient(const Sym2& m) { return inverse(Sym2::identity() + square(m)); }

PhaseParams::PhaseParams(double theta, double delta)
    : theta_(theta), delta_(delta), vartheta_(0.5 * delta) {
    if (!(theta > 0.0 && theta < std::numbers::pi)) {
        throw InvalidArgument("theta must lie in (0, pi)");
    }
    if (!(delta > 0.0 && delta < theta)) {
        throw InvalidArgument("delta must lie in (0, theta)");
    }
}

Sym2 lewy_hessian(const Sym2& m, const PhaseParams& p) {
    const double c = p.cos_vartheta();
    const double s = p.sin_vartheta();
    return mobius(m, -s, c, c, s);
}

Sym2 lewy_hessian_inverse(const Sym2& mt, const PhaseParams& p) {
    const double c = p.cos_vartheta();
    const double s = p.sin_vartheta();
    return mobius(mt, s, c, c, -s);
}

}  // namespace lmc
