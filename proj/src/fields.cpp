#include "lmc/fields.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "lmc/errors.hpp"

namespace lmc {

// ---------------------------------------------------------------------------
// PolarGrid

PolarGrid::PolarGrid(double r_min, double r_max, int n_r, int n_phi)
    : r_min_(r_min), r_max_(r_max), n_r_(n_r), n_phi_(n_phi), log_step_(0.0) {
    if (!(r_min > 0.0) || !(r_max > r_min)) {
        throw InvalidArgument("PolarGrid requires 0 < r_min < r_max");
    }
    if (n_r < 8) throw GridTooSmall("PolarGrid requires n_r >= 8");
    if (n_phi < 16 || n_phi % 2 != 0) {
        throw GridTooSmall("PolarGrid requires an even n_phi >= 16");
    }
    const double l0 = std::log(r_min);
    log_step_ = (std::log(r_max) - l0) / (n_r - 1);
    radii_.resize(static_cast<std::size_t>(n_r));
    for (int i = 0; i < n_r; ++i) radii_[static_cast<std::size_t>(i)] = std::exp(l0 + log_step_ * i);
    radii_.front() = r_min;
    radii_.back() = r_max;
}

Point PolarGrid::node(int i, int j) const {
    const double r = radius(i);
    const double phi = angle(wrap(j));
    return {r * std::cos(phi), r * std::sin(phi)};
}

PolarGrid PolarGrid::refined(int k) const {
    if (k < 1) throw InvalidArgument("grid refinement factor must be >= 1");
    return PolarGrid(r_min_, r_max_, n_r_ * k, n_phi_ * k);
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(PolarGrid grid) : grid_(std::move(grid)), values_(grid_.size(), 0.0) {}

ScalarField::ScalarField(PolarGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw ShapeMismatch("value count does not match the grid");
    }
}

ScalarField ScalarField::sample(const PolarGrid& grid,
                                const std::function<double(double, double)>& fn) {
    ScalarField u(grid);
    for (int i = 0; i < grid.n_r(); ++i) {
        for (int j = 0; j < grid.n_phi(); ++j) {
            const Point p = grid.node(i, j);
            u.at(i, j) = fn(p.x, p.y);
        }
    }
    return u;
}

ScalarField ScalarField::sample_radial(const PolarGrid& grid,
                                       const std::function<double(double)>& fn) {
    ScalarField u(grid);
    for (int i = 0; i < grid.n_r(); ++i) {
        const double v = fn(grid.radius(i));
        for (int j = 0; j < grid.n_phi(); ++j) u.at(i, j) = v;
    }
    return u;
}

std::span<const double> ScalarField::row(int i) const {
    return std::span<const double>(values_).subspan(grid_.index(i, 0),
                                                    static_cast<std::size_t>(grid_.n_phi()));
}

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw ShapeMismatch("fields live on different grids");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw ShapeMismatch("fields live on different grids");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double k) {
    for (double& v : values_) v *= k;
    return *this;
}

// ---------------------------------------------------------------------------
// Stencils

namespace stencil {

std::vector<std::array<double, 3>> fornberg(double z, std::span<const double> nodes) {
    const int n = static_cast<int>(nodes.size());
    constexpr int m = 2;
    std::vector<std::array<double, 3>> c(nodes.size(), {0.0, 0.0, 0.0});
    double c1 = 1.0;
    double c4 = nodes[0] - z;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = nodes[static_cast<std::size_t>(i)] - z;
        for (int j = 0; j < i; ++j) {
            const double c3 = nodes[static_cast<std::size_t>(i)] - nodes[static_cast<std::size_t>(j)];
            c2 *= c3;
            auto& ci = c[static_cast<std::size_t>(i)];
            const auto& cim = c[static_cast<std::size_t>(i - 1)];
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) {
                    ci[static_cast<std::size_t>(k)] =
                        c1 * (k * cim[static_cast<std::size_t>(k - 1)] - c5 * cim[static_cast<std::size_t>(k)]) / c2;
                }
                ci[0] = -c1 * c5 * cim[0] / c2;
            }
            auto& cj = c[static_cast<std::size_t>(j)];
            for (int k = mn; k >= 1; --k) {
                cj[static_cast<std::size_t>(k)] =
                    (c4 * cj[static_cast<std::size_t>(k)] - k * cj[static_cast<std::size_t>(k - 1)]) / c3;
            }
            cj[0] = c4 * cj[0] / c3;
        }
        c1 = c2;
    }
    return c;
}

namespace {

int window_start(const PolarGrid& grid, int center) {
    return std::clamp(center - 2, 0, grid.n_r() - 5);
}

}  // namespace

Radial radial(const PolarGrid& grid, int i) {
    Radial out{};
    out.first = window_start(grid, i);
    const auto nodes = std::span<const double>(grid.radii()).subspan(static_cast<std::size_t>(out.first), 5);
    const auto w = fornberg(grid.radius(i), nodes);
    for (std::size_t m = 0; m < 5; ++m) {
        out.d1[m] = w[m][1];
        out.d2[m] = w[m][2];
    }
    return out;
}

Angular angular(const PolarGrid& grid) {
    const double h = grid.angle_step();
    // Solve 2x2 systems for the k = 1, 2 exactness conditions.
    auto solve2 = [](double a11, double a12, double a21, double a22, double b1, double b2) {
        const double det = a11 * a22 - a12 * a21;
        return std::pair{(b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det};
    };
    // First derivative: a1 sin kh + a2 sin 2kh = k/2.
    const auto [a1, a2] = solve2(std::sin(h), std::sin(2 * h), std::sin(2 * h), std::sin(4 * h), 0.5, 1.0);
    // Second derivative: 2 b1 (cos kh − 1) + 2 b2 (cos 2kh − 1) = −k².
    const auto [b1, b2] = solve2(2 * (std::cos(h) - 1), 2 * (std::cos(2 * h) - 1),
                                 2 * (std::cos(2 * h) - 1), 2 * (std::cos(4 * h) - 1), -1.0, -4.0);
    Angular out{};
    out.d1 = {-a2, -a1, 0.0, a1, a2};
    out.d2 = {b2, b1, -2.0 * (b1 + b2), b1, b2};
    return out;
}

}  // namespace stencil

namespace {

void require_radial_nodes(const PolarGrid& grid) {
    if (grid.n_r() < 5) throw GridTooSmall("at least 5 radial nodes are required");
}

// Polar partial derivatives at one node.
struct PolarDerivs {
    double ur = 0, urr = 0, up = 0, upp = 0, urp = 0;
};

Sym2 cartesian_hessian(const PolarDerivs& d, double r, double phi) {
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double ir = 1.0 / r;
    const double ir2 = ir * ir;
    return {c * c * d.urr + s * s * (d.ur * ir + d.upp * ir2) - 2 * s * c * (d.urp * ir - d.up * ir2),
            s * c * (d.urr - d.ur * ir - d.upp * ir2) + (c * c - s * s) * (d.urp * ir - d.up * ir2),
            s * s * d.urr + c * c * (d.ur * ir + d.upp * ir2) + 2 * s * c * (d.urp * ir - d.up * ir2)};
}

// Seven-point radial interpolation window around an arbitrary radius.
constexpr int kWin = 7;

struct RadialWindow {
    int first;
    std::array<double, kWin> w0;
    std::array<double, kWin> w1;
};

RadialWindow radial_window(const PolarGrid& grid, double r) {
    const auto& radii = grid.radii();
    const auto it = std::upper_bound(radii.begin(), radii.end(), r);
    int k = static_cast<int>(it - radii.begin()) - 1;
    k = std::clamp(k, 0, grid.n_r() - 1);
    // Centre the window on the nearer of the bracketing nodes.
    if (k + 1 < grid.n_r() && (r - radii[static_cast<std::size_t>(k)]) >
                                  (radii[static_cast<std::size_t>(k + 1)] - r)) {
        ++k;
    }
    RadialWindow out{};
    out.first = std::clamp(k - kWin / 2, 0, grid.n_r() - kWin);
    const auto w = stencil::fornberg(r, std::span<const double>(radii).subspan(static_cast<std::size_t>(out.first), kWin));
    for (std::size_t m = 0; m < kWin; ++m) {
        out.w0[m] = w[m][0];
        out.w1[m] = w[m][1];
    }
    return out;
}

void require_interior_radius(const PolarGrid& grid, double r) {
    const auto& radii = grid.radii();
    const auto below = std::lower_bound(radii.begin(), radii.end(), r) - radii.begin();
    const auto above = radii.end() - std::upper_bound(radii.begin(), radii.end(), r);
    if (!(r > grid.r_min() && r < grid.r_max()) || below < 2 || above < 2) {
        throw RadiusOutOfRange("radius " + std::to_string(r) +
                               " needs two grid nodes on each side");
    }
}

}  // namespace

std::vector<HessianTap> hessian_stencil(const PolarGrid& grid, int i, int j) {
    require_radial_nodes(grid);
    const auto rad = stencil::radial(grid, i);
    const auto ang = stencil::angular(grid);
    const double r = grid.radius(i);
    const double phi = grid.angle(grid.wrap(j));
    std::vector<HessianTap> taps;
    taps.reserve(35);
    for (int m = 0; m < 5; ++m) {
        PolarDerivs d;
        d.ur = rad.d1[static_cast<std::size_t>(m)];
        d.urr = rad.d2[static_cast<std::size_t>(m)];
        taps.push_back({grid.index(rad.first + m, j), cartesian_hessian(d, r, phi)});
    }
    for (int q = -2; q <= 2; ++q) {
        if (q == 0) {
            PolarDerivs d;
            d.upp = ang.d2[2];
            taps.push_back({grid.index(i, j), cartesian_hessian(d, r, phi)});
            continue;
        }
        PolarDerivs d;
        d.up = ang.d1[static_cast<std::size_t>(q + 2)];
        d.upp = ang.d2[static_cast<std::size_t>(q + 2)];
        taps.push_back({grid.index(i, j + q), cartesian_hessian(d, r, phi)});
        for (int m = 0; m < 5; ++m) {
            PolarDerivs dm;
            dm.urp = rad.d1[static_cast<std::size_t>(m)] * ang.d1[static_cast<std::size_t>(q + 2)];
            taps.push_back({grid.index(rad.first + m, j + q), cartesian_hessian(dm, r, phi)});
        }
    }
    return taps;
}

std::pair<ScalarField, ScalarField> gradient(const ScalarField& u) {
    const PolarGrid& g = u.grid();
    require_radial_nodes(g);
    const auto ang = stencil::angular(g);
    ScalarField ux(g);
    ScalarField uy(g);
    for (int i = 0; i < g.n_r(); ++i) {
        const auto rad = stencil::radial(g, i);
        const double r = g.radius(i);
        for (int j = 0; j < g.n_phi(); ++j) {
            double ur = 0.0;
            for (int m = 0; m < 5; ++m) ur += rad.d1[static_cast<std::size_t>(m)] * u.at(rad.first + m, j);
            double up = 0.0;
            for (int q = -2; q <= 2; ++q) up += ang.d1[static_cast<std::size_t>(q + 2)] * u.at(i, j + q);
            const double phi = g.angle(j);
            const double c = std::cos(phi);
            const double s = std::sin(phi);
            ux.at(i, j) = c * ur - s * up / r;
            uy.at(i, j) = s * ur + c * up / r;
        }
    }
    return {std::move(ux), std::move(uy)};
}

HessianField hessian(const ScalarField& u) {
    const PolarGrid& g = u.grid();
    require_radial_nodes(g);
    const auto ang = stencil::angular(g);
    HessianField out{g, std::vector<Sym2>(g.size())};
    std::vector<double> up_rows(g.size());
    for (int i = 0; i < g.n_r(); ++i) {
        for (int j = 0; j < g.n_phi(); ++j) {
            double up = 0.0;
            for (int q = -2; q <= 2; ++q) up += ang.d1[static_cast<std::size_t>(q + 2)] * u.at(i, j + q);
            up_rows[g.index(i, j)] = up;
        }
    }
    for (int i = 0; i < g.n_r(); ++i) {
        const auto rad = stencil::radial(g, i);
        const double r = g.radius(i);
        for (int j = 0; j < g.n_phi(); ++j) {
            PolarDerivs d;
            for (int m = 0; m < 5; ++m) {
                const auto mm = static_cast<std::size_t>(m);
                d.ur += rad.d1[mm] * u.at(rad.first + m, j);
                d.urr += rad.d2[mm] * u.at(rad.first + m, j);
                d.urp += rad.d1[mm] * up_rows[g.index(rad.first + m, j)];
            }
            d.up = up_rows[g.index(i, j)];
            for (int q = -2; q <= 2; ++q) d.upp += ang.d2[static_cast<std::size_t>(q + 2)] * u.at(i, j + q);
            out.values[g.index(i, j)] = cartesian_hessian(d, r, g.angle(j));
        }
    }
    return out;
}

ScalarField laplacian(const ScalarField& u) {
    const HessianField h = hessian(u);
    ScalarField out(u.grid());
    for (std::size_t k = 0; k < h.values.size(); ++k) out.values()[k] = h.values[k].trace();
    return out;
}

CircleSamples circle_samples(const ScalarField& u, double r) {
    const PolarGrid& g = u.grid();
    require_radial_nodes(g);
    require_interior_radius(g, r);
    const auto win = radial_window(g, r);
    const auto ang = stencil::angular(g);
    const int n = g.n_phi();
    CircleSamples out;
    out.value.assign(static_cast<std::size_t>(n), 0.0);
    out.ux.assign(static_cast<std::size_t>(n), 0.0);
    out.uy.assign(static_cast<std::size_t>(n), 0.0);
    std::vector<double> ur(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < kWin; ++m) {
            const double v = u.at(win.first + m, j);
            out.value[static_cast<std::size_t>(j)] += win.w0[static_cast<std::size_t>(m)] * v;
            ur[static_cast<std::size_t>(j)] += win.w1[static_cast<std::size_t>(m)] * v;
        }
    }
    for (int j = 0; j < n; ++j) {
        double up = 0.0;
        for (int q = -2; q <= 2; ++q) {
            up += ang.d1[static_cast<std::size_t>(q + 2)] * out.value[static_cast<std::size_t>(g.wrap(j + q))];
        }
        const double phi = g.angle(j);
        const auto jj = static_cast<std::size_t>(j);
        out.ux[jj] = std::cos(phi) * ur[jj] - std::sin(phi) * up / r;
        out.uy[jj] = std::sin(phi) * ur[jj] + std::cos(phi) * up / r;
    }
    return out;
}

std::vector<double> circle_values(const ScalarField& u, double r) {
    const PolarGrid& g = u.grid();
    require_radial_nodes(g);
    if (!(r >= g.r_min() && r <= g.r_max())) {
        throw RadiusOutOfRange("radius " + std::to_string(r) + " lies outside the grid annulus");
    }
    const auto& radii = g.radii();
    const auto hit = std::find(radii.begin(), radii.end(), r);
    if (hit != radii.end()) {
        const auto row = u.row(static_cast<int>(hit - radii.begin()));
        return {row.begin(), row.end()};
    }
    const auto win = radial_window(g, r);
    std::vector<double> out(static_cast<std::size_t>(g.n_phi()), 0.0);
    for (int j = 0; j < g.n_phi(); ++j) {
        for (int m = 0; m < kWin; ++m) {
            out[static_cast<std::size_t>(j)] += win.w0[static_cast<std::size_t>(m)] * u.at(win.first + m, j);
        }
    }
    return out;
}

double flux_integral(const ScalarField& u, double r) {
    const PolarGrid& g = u.grid();
    const CircleSamples cs = circle_samples(u, r);
    double sum = 0.0;
    for (int j = 0; j < g.n_phi(); ++j) {
        const double phi = g.angle(j);
        const auto jj = static_cast<std::size_t>(j);
        sum += std::cos(phi) * cs.ux[jj] + std::sin(phi) * cs.uy[jj];
    }
    return sum * r * g.angle_step();
}

std::vector<std::complex<double>> circle_modes(const ScalarField& u, double r, int k_max) {
    const PolarGrid& g = u.grid();
    if (k_max < 0 || 2 * k_max >= g.n_phi()) {
        throw TooManyModes("k_max must be below n_phi / 2");
    }
    require_interior_radius(g, r);
    const auto win = radial_window(g, r);
    const int n = g.n_phi();
    std::vector<double> vals(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < kWin; ++m) {
            vals[static_cast<std::size_t>(j)] += win.w0[static_cast<std::size_t>(m)] * u.at(win.first + m, j);
        }
    }
    std::vector<std::complex<double>> modes(static_cast<std::size_t>(k_max + 1));
    for (int k = 0; k <= k_max; ++k) {
        std::complex<double> acc = 0.0;
        for (int j = 0; j < n; ++j) {
            acc += vals[static_cast<std::size_t>(j)] * std::polar(1.0, -k * g.angle(j));
        }
        modes[static_cast<std::size_t>(k)] = acc / static_cast<double>(n);
    }
    return modes;
}

double interpolate(const ScalarField& u, Point p) {
    const PolarGrid& g = u.grid();
    const double r = std::hypot(p.x, p.y);
    const double slack = 1e-12 * g.r_max();
    if (r < g.r_min() - slack || r > g.r_max() + slack) {
        throw OutOfDomain("point lies outside the grid annulus");
    }
    const auto win = radial_window(g, std::clamp(r, g.r_min(), g.r_max()));
    double phi = std::atan2(p.y, p.x);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    const double h = g.angle_step();
    const int j0 = static_cast<int>(std::floor(phi / h));
    // Six-point periodic Lagrange interpolation in angle.
    constexpr int kPts = 6;
    std::array<double, kPts> nodes{};
    std::array<double, kPts> wphi{};
    for (int q = 0; q < kPts; ++q) nodes[static_cast<std::size_t>(q)] = (j0 - 2 + q) * h;
    for (int q = 0; q < kPts; ++q) {
        double w = 1.0;
        for (int t = 0; t < kPts; ++t) {
            if (t != q) {
                w *= (phi - nodes[static_cast<std::size_t>(t)]) /
                     (nodes[static_cast<std::size_t>(q)] - nodes[static_cast<std::size_t>(t)]);
            }
        }
        wphi[static_cast<std::size_t>(q)] = w;
    }
    double acc = 0.0;
    for (int m = 0; m < kWin; ++m) {
        double row = 0.0;
        for (int q = 0; q < kPts; ++q) row += wphi[static_cast<std::size_t>(q)] * u.at(win.first + m, j0 - 2 + q);
        acc += win.w0[static_cast<std::size_t>(m)] * row;
    }
    return acc;
}

ScalarField rescale(const ScalarField& u, Point x, double big_r, const PolarGrid& target) {
    const PolarGrid& g = u.grid();
    if (!(big_r > 0.0)) throw InvalidArgument("rescale radius must be positive");
    if (target.r_max() > 2.0) throw InvalidArgument("rescale target grid must lie in |y| <= 2");
    const double cx = std::hypot(x.x, x.y);
    if (cx - 0.5 * big_r < g.r_min() || cx + 0.5 * big_r > g.r_max()) {
        throw OutOfDomain("ball B_{R/2}(x) is not contained in the grid annulus");
    }
    const double amp = (4.0 / big_r) * (4.0 / big_r);
    const double q = big_r / 4.0;
    return ScalarField::sample(target, [&](double y1, double y2) {
        return amp * interpolate(u, {x.x + q * y1, x.y + q * y2});
    });
}

void write_field(std::ostream& os, const ScalarField& u) {
    const PolarGrid& g = u.grid();
    os << std::setprecision(17);
    os << "polar-field v1 " << g.r_min() << ' ' << g.r_max() << ' ' << g.n_r() << ' '
       << g.n_phi() << '\n';
    for (int i = 0; i < g.n_r(); ++i) {
        for (int j = 0; j < g.n_phi(); ++j) {
            if (j) os << ' ';
            os << u.at(i, j);
        }
        os << '\n';
    }
}

ScalarField read_field(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw FormatError("missing polar-field header");
    std::istringstream hs(header);
    std::string tag, version;
    double r_min = 0, r_max = 0;
    int n_r = 0, n_phi = 0;
    if (!(hs >> tag >> version >> r_min >> r_max >> n_r >> n_phi) || tag != "polar-field" ||
        version != "v1") {
        throw FormatError("header must read 'polar-field v1 r_min r_max n_r n_phi'");
    }
    PolarGrid grid(r_min, r_max, n_r, n_phi);
    std::vector<double> values(grid.size());
    for (auto& v : values) {
        if (!(is >> v)) throw FormatError("truncated polar-field body");
    }
    return ScalarField(std::move(grid), std::move(values));
}

}  // namespace lmc
