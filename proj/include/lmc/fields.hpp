#pragma once

// Scalar fields on log-radial x uniform-angular annulus grids, with
// finite-difference calculus in Cartesian components, circle integrals,
// angular Fourier modes and the blow-down rescaling y ↦ (4/R)² u(x + (R/4) y).
//
// Derivatives use five-point radial stencils (Fornberg weights on the
// geometric nodes, exact on polynomials of degree ≤ 4 in r) and five-point
// angular stencils fitted to be exact on Fourier modes 0, 1, 2. Together they
// reproduce every quadratic polynomial in (x1, x2) up to roundoff, including
// on the one-sided boundary rows.

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "lmc/phase.hpp"

namespace lmc {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

class PolarGrid {
public:
    /// Requires 0 < r_min < r_max, n_r ≥ 8, n_phi even and ≥ 16.
    PolarGrid(double r_min, double r_max, int n_r, int n_phi);

    [[nodiscard]] double r_min() const { return r_min_; }
    [[nodiscard]] double r_max() const { return r_max_; }
    [[nodiscard]] int n_r() const { return n_r_; }
    [[nodiscard]] int n_phi() const { return n_phi_; }
    [[nodiscard]] std::size_t size() const {
        return static_cast<std::size_t>(n_r_) * static_cast<std::size_t>(n_phi_);
    }

    [[nodiscard]] double radius(int i) const { return radii_[static_cast<std::size_t>(i)]; }
    [[nodiscard]] const std::vector<double>& radii() const { return radii_; }
    [[nodiscard]] double angle(int j) const { return angle_step() * j; }
    [[nodiscard]] double angle_step() const { return 2.0 * std::numbers::pi / n_phi_; }
    /// Uniform step in ln r.
    [[nodiscard]] double log_step() const { return log_step_; }
    [[nodiscard]] Point node(int i, int j) const;
    [[nodiscard]] std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(i) * static_cast<std::size_t>(n_phi_) +
               static_cast<std::size_t>(wrap(j));
    }
    [[nodiscard]] int wrap(int j) const { return ((j % n_phi_) + n_phi_) % n_phi_; }

    /// Same annulus with node counts multiplied by k (n_r scales as (n_r−1)·k + 1).
    [[nodiscard]] PolarGrid refined(int k) const;

    friend bool operator==(const PolarGrid& a, const PolarGrid& b) {
        return a.r_min_ == b.r_min_ && a.r_max_ == b.r_max_ && a.n_r_ == b.n_r_ &&
               a.n_phi_ == b.n_phi_;
    }

private:
    double r_min_;
    double r_max_;
    int n_r_;
    int n_phi_;
    double log_step_;
    std::vector<double> radii_;
};

/// Values u(r_i, φ_j) stored row-major (row = fixed radius).
class ScalarField {
public:
    explicit ScalarField(PolarGrid grid);
    ScalarField(PolarGrid grid, std::vector<double> values);

    /// Samples fn(x1, x2) at every node.
    static ScalarField sample(const PolarGrid& grid,
                              const std::function<double(double, double)>& fn);
    /// Samples a radial profile g(r).
    static ScalarField sample_radial(const PolarGrid& grid,
                                     const std::function<double(double)>& fn);

    [[nodiscard]] const PolarGrid& grid() const { return grid_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] double at(int i, int j) const { return values_[grid_.index(i, j)]; }
    double& at(int i, int j) { return values_[grid_.index(i, j)]; }
    [[nodiscard]] std::span<const double> row(int i) const;

    [[nodiscard]] double sup_norm() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double k);
    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(ScalarField a, double k) { return a *= k; }

private:
    PolarGrid grid_;
    std::vector<double> values_;
};

/// A Sym2 per grid node.
struct HessianField {
    PolarGrid grid;
    std::vector<Sym2> values;

    [[nodiscard]] const Sym2& at(int i, int j) const { return values[grid.index(i, j)]; }
};

/// One term of the linear map u ↦ D²u(node): the Hessian at the node is
/// Σ weight · u[index] over the stencil.
struct HessianTap {
    std::size_t index;
    Sym2 weight;
};

/// Linear Hessian stencil at node (i, j); taps may repeat an index.
std::vector<HessianTap> hessian_stencil(const PolarGrid& grid, int i, int j);

/// Cartesian gradient (u_x1, u_x2). Throws GridTooSmall when n_r < 5.
std::pair<ScalarField, ScalarField> gradient(const ScalarField& u);

/// Cartesian Hessian at every node.
HessianField hessian(const ScalarField& u);

/// Discrete Laplacian (trace of hessian).
ScalarField laplacian(const ScalarField& u);

/// Boundary flux ∮_{|x|=r} ∂_r u ds. Requires two radial nodes on each side of r.
double flux_integral(const ScalarField& u, double r);

/// Values and Cartesian gradient on the circle |x| = r at the grid angles.
struct CircleSamples {
    std::vector<double> value;
    std::vector<double> ux;
    std::vector<double> uy;
};
CircleSamples circle_samples(const ScalarField& u, double r);

/// Values on |x| = r at the grid angles, for any r in [r_min, r_max]. Node
/// radii return the stored row.
std::vector<double> circle_values(const ScalarField& u, double r);

/// Fourier coefficients c_0..c_kmax of φ ↦ u(r, φ), normalized so that
/// u = c_0 + Σ_{k≥1} (c_k e^{ikφ} + conj).
std::vector<std::complex<double>> circle_modes(const ScalarField& u, double r, int k_max);

/// Interpolated value at an arbitrary point of the annulus.
double interpolate(const ScalarField& u, Point p);

/// y ↦ (4/R)² u(x + (R/4) y) sampled on target (a grid in the y variable with
/// r_max ≤ 2). Throws OutOfDomain unless B_{R/2}(x) lies in the annulus.
ScalarField rescale(const ScalarField& u, Point x, double big_r, const PolarGrid& target);

/// "polar-field v1" text format.
void write_field(std::ostream& os, const ScalarField& u);
ScalarField read_field(std::istream& is);

// Stencil weights exposed for the solver and tests.
namespace stencil {

/// Fornberg finite-difference weights for derivatives 0..max_order at z on nodes.
std::vector<std::array<double, 3>> fornberg(double z, std::span<const double> nodes);

/// Radial five-point weights at node i: first index of the window plus the
/// weights for d/dr and d²/dr².
struct Radial {
    int first;
    std::array<double, 5> d1;
    std::array<double, 5> d2;
};
Radial radial(const PolarGrid& grid, int i);

/// Angular weights for offsets −2..2, exact on e^{ikφ} for k = 0, 1, 2.
struct Angular {
    std::array<double, 5> d1;
    std::array<double, 5> d2;
};
Angular angular(const PolarGrid& grid);

}  // namespace stencil

}  // namespace lmc
